#include "region_plot.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "csma/stability.hpp"

namespace csma::cli {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaError("row " + std::to_string(row) + ": '" + s + "' is not a number");
  }
}

}  // namespace

std::vector<Polyline> region_plot(const std::string& sweep_csv) {
  std::stringstream in(sweep_csv);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("sweep CSV is empty (no header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  const auto col = [&](const std::string& name) -> std::ptrdiff_t {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const auto u_col = col("u"), v_col = col("v");
  auto verdict_col = col("verdict");
  std::string source = "simulation";
  if (verdict_col < 0) {
    verdict_col = col("status");
    source = "lp";
  }
  if (u_col < 0 || v_col < 0 || verdict_col < 0) {
    throw SchemaError("sweep CSV needs columns u, v and verdict or status");
  }

  std::map<double, double> best;  // rho_1 -> largest favourable rho_3
  std::vector<double> columns;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw SchemaError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(header.size()));
    }
    const double u = to_double(cells[u_col], row), v = to_double(cells[v_col], row);
    const std::string& verdict = cells[verdict_col];
    columns.push_back(u);
    if (verdict == "interior" || verdict == "stable-evidence") {
      auto [it, fresh] = best.emplace(u, v);
      if (!fresh) it->second = std::max(it->second, v);
    }
  }
  std::sort(columns.begin(), columns.end());
  columns.erase(std::unique(columns.begin(), columns.end()), columns.end());

  Polyline optimal{"eq11", {}}, standard{"eq12", {}}, sweep{source, {}};
  if (!columns.empty()) {
    const double lo = std::max(0.0, columns.front()), hi = std::min(1.0, columns.back());
    auto with = [&](std::vector<double> xs) {
      xs.erase(std::remove_if(xs.begin(), xs.end(), [&](double x) { return x < lo || x > hi; }), xs.end());
      std::sort(xs.begin(), xs.end());
      xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
      return xs;
    };
    // Corner of min(1, 2 - 2 rho_1) and the symmetric point (2/3, 2/3).
    auto xs_opt = columns;
    xs_opt.push_back(0.5);
    xs_opt.push_back(2.0 / 3.0);
    for (double x : with(xs_opt)) optimal.points.push_back({x, optimal_critical_rho3(x)});
    auto xs_csma = columns;
    xs_csma.push_back(bowtie_fixed_point());
    for (double x : with(xs_csma)) standard.points.push_back({x, csma_critical_rho3(x)});
  }
  for (const auto& [u, v] : best) sweep.points.push_back({u, v});
  return {optimal, standard, sweep};
}

std::string region_plot_csv(const std::vector<Polyline>& lines) {
  std::ostringstream os;
  os.precision(17);
  os << "source,rho1,rho3\n";
  for (const auto& l : lines) {
    for (const auto& p : l.points) os << l.source << ',' << p.rho1 << ',' << p.rho3 << '\n';
  }
  return os.str();
}

std::string gnuplot_data(const Polyline& line) {
  std::ostringstream os;
  os.precision(17);
  os << "# " << line.source << ": rho1 rho3\n";
  for (const auto& p : line.points) os << p.rho1 << ' ' << p.rho3 << '\n';
  return os.str();
}

}  // namespace csma::cli
