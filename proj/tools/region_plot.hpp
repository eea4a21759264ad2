#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace csma::cli {

/// The sweep CSV does not have the expected columns.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlotPoint {
  double rho1;
  double rho3;
};

struct Polyline {
  std::string source;
  std::vector<PlotPoint> points;
};

/// Boundary polylines over (rho_1, rho_3) in [0, 1]^2: the capacity bound, the
/// standard-CSMA instability bound, and the largest favourable rho_3 per
/// rho_1 column of the sweep ("lp" for capacity sweeps, "simulation" for
/// stability sweeps). The closed-form curves are evaluated on the sweep's
/// rho_1 values plus their own corner points; an empty sweep gives empty
/// polylines.
std::vector<Polyline> region_plot(const std::string& sweep_csv);

/// "source,rho1,rho3" rows.
std::string region_plot_csv(const std::vector<Polyline>& lines);

/// Two-column whitespace data for one polyline.
std::string gnuplot_data(const Polyline& line);

}  // namespace csma::cli
