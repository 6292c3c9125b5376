#include "covkit/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "covkit/errors.hpp"

#ifndef COVKIT_VERSION
#define COVKIT_VERSION "0.0.0"
#endif

namespace covkit {

const char* const version = COVKIT_VERSION;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable parse_csv(std::string_view text, const std::string& source) {
  CsvTable t;
  std::size_t line_no = 0, pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw InputError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                       " columns, found " + std::to_string(cells.size()));
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cells[c].size())
        throw InputError(source + ":" + std::to_string(line_no) + ":" + std::to_string(c + 1) + ": '" + cells[c] +
                         "' is not a number");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw InputError(source + ": missing header row");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

PointSet points_from_csv(const CsvTable& table) {
  int d = 0, k = 0;
  for (const auto& h : table.header) {
    const bool space = h.size() > 1 && h[0] == 'x', time = h.size() > 1 && h[0] == 't';
    if (!space && !time) throw InputError("points: unexpected column '" + h + "' (want x1..xd, t1..tk)");
    const std::string expect = space ? "x" + std::to_string(d + 1) : "t" + std::to_string(k + 1);
    if (h != expect || (space && k > 0))
      throw InputError("points: column '" + h + "' out of order (want x1..xd then t1..tk)");
    (space ? d : k) += 1;
  }
  if (d == 0) throw InputError("points: need at least column x1");
  std::vector<Point> pts;
  for (const auto& r : table.rows) pts.emplace_back(r.begin(), r.end());
  if (pts.empty()) throw InputError("points: no rows");
  return PointSet(Domain{d, k}, std::move(pts));
}

PointSet read_points(const std::filesystem::path& path) { return points_from_csv(read_csv(path)); }

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw InputError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InputError("cannot move output into place at '" + path.string() + "': " + ec.message());
  }
}

std::string eval_csv(const KernelSpec& spec, const PointSet& pts) {
  const int m = spec.m();
  std::ostringstream os;
  os << "i,j";
  for (int p = 1; p <= m; ++p)
    for (int q = 1; q <= m; ++q) os << ",C_" << p << '_' << q;
  os << '\n';
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) {
      Block b;
      try {
        b = spec.evaluate(pts[i], pts[j]);
      } catch (const Error& e) {
        throw EvaluationError("points (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.what());
      }
      os << i << ',' << j;
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) os << ',' << format_double(b(p, q));
      os << '\n';
    }
  return os.str();
}

std::string samples_csv(const std::vector<Realization>& reals) {
  std::ostringstream os;
  os << "realization,location,variable,value\n";
  for (const auto& r : reals)
    for (Eigen::Index i = 0; i < r.values.rows(); ++i)
      for (Eigen::Index p = 0; p < r.values.cols(); ++p)
        os << r.index << ',' << i << ',' << p << ',' << format_double(r.values(i, p)) << '\n';
  return os.str();
}

std::vector<Realization> realizations_from_csv(const CsvTable& table, const std::vector<Point>& points) {
  if (table.header != std::vector<std::string>{"realization", "location", "variable", "value"})
    throw InputError("samples: header must be realization,location,variable,value");
  long max_r = -1, max_p = -1;
  for (const auto& row : table.rows) {
    for (int c = 0; c < 3; ++c)
      if (row[static_cast<std::size_t>(c)] < 0 || row[static_cast<std::size_t>(c)] != std::floor(row[static_cast<std::size_t>(c)]))
        throw InputError("samples: index columns must be non-negative integers");
    if (row[1] >= static_cast<double>(points.size())) throw InputError("samples: location index beyond the grid");
    max_r = std::max(max_r, static_cast<long>(row[0]));
    max_p = std::max(max_p, static_cast<long>(row[2]));
  }
  std::vector<Realization> out(static_cast<std::size_t>(max_r + 1));
  std::vector<std::vector<char>> seen(out.size());
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r].points = points;
    out[r].index = r;
    out[r].values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()), max_p + 1);
    seen[r].assign(points.size() * static_cast<std::size_t>(max_p + 1), 0);
  }
  for (const auto& row : table.rows) {
    const auto r = static_cast<std::size_t>(row[0]);
    const auto i = static_cast<std::size_t>(row[1]), p = static_cast<std::size_t>(row[2]);
    out[r].values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = row[3];
    seen[r][i * static_cast<std::size_t>(max_p + 1) + p] = 1;
  }
  for (const auto& s : seen)
    for (char c : s)
      if (!c) throw InputError("samples: every (realization, location, variable) must appear once");
  return out;
}

std::string estimate_csv(const EmpiricalPcv& est) {
  std::ostringstream os;
  const Eigen::Index dim = est.lags.empty() ? 0 : est.lags.front().size();
  const Eigen::Index m = est.estimates.empty() ? 0 : est.estimates.front().rows();
  for (Eigen::Index c = 0; c < dim; ++c) os << 'h' << c + 1 << ',';
  os << "count";
  for (Eigen::Index i = 1; i <= m; ++i)
    for (Eigen::Index j = 1; j <= m; ++j) os << ",g_" << i << '_' << j;
  for (Eigen::Index i = 1; i <= m; ++i)
    for (Eigen::Index j = 1; j <= m; ++j) os << ",se_" << i << '_' << j;
  os << '\n';
  for (std::size_t b = 0; b < est.lags.size(); ++b) {
    for (Eigen::Index c = 0; c < dim; ++c) os << format_double(est.lags[b](c)) << ',';
    os << est.counts[b];
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) os << ',' << format_double(est.estimates[b](i, j));
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) os << ',' << format_double(est.std_errors[b](i, j));
    os << '\n';
  }
  return os.str();
}

nlohmann::json RunManifest::to_json() const {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
  return {{"command", command},   {"config_hash", hash},     {"seed", seed},
          {"tool", "covkit"},     {"tool_version", version}, {"started", started},
          {"finished", finished}, {"arguments", arguments}};
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::filesystem::path& output, const RunManifest& manifest) {
  std::filesystem::path p = output;
  p += ".manifest.json";
  atomic_write(p, manifest.to_json().dump(2) + "\n");
}

}  // namespace covkit
