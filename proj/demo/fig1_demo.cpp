// Renders f_{a,5} with a = 2 sqrt(pi/5) and prints its mode report.
//
//   fig1_demo [out.svg]

#include <gmodes/gmodes.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "fig1.svg";
  const int n = 5;
  const double a = gmodes::critical_spacing<double>(n);
  const auto m = gmodes::make_faN(a, n);
  const auto ctx = gmodes::PrecisionContext::hardware();

  const double half = a * n / 2;
  const auto scan = gmodes::count_modes_1d(m, gmodes::Interval<double>{-half, half}, a / 8, ctx);
  const auto cert = gmodes::certified_lower_bound_1d(
      m, gmodes::IntervalFamily<double>::lattice_cells(a, -half, half), ctx);
  std::cout << "a = " << a << ", S = [" << -half << ", " << half << "]\n";
  std::cout << "sign-change scan:\n" << gmodes::to_json(scan).dump(2) << '\n';
  std::cout << "certified: " << cert.count << " (need " << n - 1 << ")\n";

  const auto plot = gmodes::cmd_plot(m, -8.0, 8.0, 801, path);
  std::cout << "wrote " << path << " with " << plot.modes.size() << " marked modes\n";
}
