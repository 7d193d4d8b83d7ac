// Command-line front end for the sweeps, bounds table, plots and slope fits.
//
// Exit codes: 0 success, 1 a checked bound or mode count was violated,
// 2 usage or input error.

#include <gmodes/gmodes.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

struct OutputOptions {
  std::string out;
  std::string format = "csv";
};

void add_output(CLI::App* cmd, OutputOptions& o) {
  cmd->add_option("--out", o.out, "Write output to this file instead of stdout");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

void emit(const OutputOptions& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + o.out + "' for writing");
  f << text;
  if (!f.flush()) throw std::runtime_error("write to '" + o.out + "' failed");
}

std::string render(const OutputOptions& o, const gmodes::SweepResult& res) {
  std::ostringstream s;
  if (o.format == "json") {
    s << gmodes::to_json(res).dump(2) << '\n';
  } else {
    gmodes::write_csv(s, res.records);
  }
  return s.str();
}

int finish_sweep(const OutputOptions& o, const gmodes::SweepResult& res) {
  emit(o, render(o, res));
  if (res.threshold_n0) std::cerr << "N0=" << *res.threshold_n0 << '\n';
  for (const auto& v : res.violations) std::cerr << "violation: " << v << '\n';
  return res.violations.empty() ? kOk : kViolation;
}

gmodes::PrecisionPolicy policy_from(const std::optional<int>& bits, int floor_bits = 0) {
  gmodes::PrecisionPolicy p;
  p.fixed_bits = bits;
  p.floor_bits = floor_bits;
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mode counts of Gaussian mixtures on lattice constructions"};
  app.require_subcommand(1);

  // prop1 / prop2
  std::vector<int> p1_n{4, 8, 16, 32};
  std::optional<int> p1_bits;
  OutputOptions p1_out;
  auto* prop1 = app.add_subcommand("prop1", "Periodized-Gaussian lattice f_{a,N}: modes in [-aN/2, aN/2]");
  prop1->add_option("--n", p1_n, "Comma-separated N values")->delimiter(',');
  prop1->add_option("--bits", p1_bits, "Fixed mantissa bits (default: required_bits(N))")
      ->check(CLI::Range(53, 960));
  add_output(prop1, p1_out);

  std::vector<int> p2_n{1, 2, 4, 8, 16, 32};
  std::optional<int> p2_bits;
  OutputOptions p2_out;
  auto* prop2 = app.add_subcommand("prop2", "Variance-constrained mixture: certified modes and N0");
  prop2->add_option("--n", p2_n, "Comma-separated N values")->delimiter(',');
  prop2->add_option("--bits", p2_bits, "Fixed mantissa bits (default: required_bits(N))")
      ->check(CLI::Range(53, 960));
  add_output(prop2, p2_out);

  // prop3
  std::vector<int> p3_n{2, 3, 4};
  std::optional<int> p3_bits;
  gmodes::Prop3Options p3_opt;
  OutputOptions p3_out;
  auto* prop3 = app.add_subcommand("prop3", "d-dimensional lattice: certified cube counts");
  prop3->add_option("--d", p3_opt.d, "Dimension")->check(CLI::Range(1, 3));
  prop3->add_option("--n", p3_n, "Comma-separated N values")->delimiter(',');
  prop3->add_option("--c", p3_opt.c, "Spacing constant: a = c / sqrt(N) (default 2 sqrt(pi))");
  prop3->add_option("--cprime", p3_opt.c_prime, "Box constant: cubes inside [-c' sqrt(N), c' sqrt(N)]^d "
                                                "(default sqrt(pi))");
  prop3->add_option("--bits", p3_bits, "Fixed mantissa bits (default: max(128, required_bits(N)))")
      ->check(CLI::Range(53, 960));
  add_output(prop3, p3_out);

  // bounds
  std::string grid_spec = "0.3:6:0.1";
  gmodes::BoundsOptions b_opt;
  OutputOptions b_out;
  auto* bounds = app.add_subcommand("bounds", "Hill-height sandwich, dual-domain residuals, truncation bounds");
  bounds->add_option("--a-grid", grid_spec, "lo:hi:step or comma list");
  bounds->add_option("--trunc-samples", b_opt.trunc_samples, "Samples for the truncation sup")
      ->check(CLI::Range(2, 1000000));
  add_output(bounds, b_out);

  // plot
  std::string construction = "faN";
  std::optional<double> plot_a;
  int plot_n = 5;
  int plot_samples = 801;
  std::optional<double> plot_lo, plot_hi;
  std::string plot_path;
  auto* plot = app.add_subcommand("plot", "SVG of a one-dimensional construction's density");
  plot->add_option("--construction", construction, "gamma (normalized), faN (unit weights) or Gamma")
      ->check(CLI::IsMember({"gamma", "faN", "Gamma"}));
  plot->add_option("--a", plot_a, "Spacing (default 2 sqrt(pi/N); ignored for Gamma)");
  plot->add_option("--n", plot_n, "N")->check(CLI::Range(0, 100000));
  plot->add_option("--samples", plot_samples, "Number of sample points")->check(CLI::Range(2, 10000000));
  plot->add_option("--lo", plot_lo, "Left end (default -(A + 1))");
  plot->add_option("--hi", plot_hi, "Right end (default A + 1)");
  plot->add_option("--out", plot_path, "SVG output path")->required();

  // slope
  std::string slope_in;
  std::string slope_field = "mode_count";
  OutputOptions s_out;
  auto* slope = app.add_subcommand("slope", "Least-squares slope of ln(count) against ln(A)");
  slope->add_option("--in", slope_in, "Sweep CSV")->required();
  slope->add_option("--field", slope_field, "Count column")->check(CLI::IsMember({"mode_count", "certified_count"}));
  add_output(slope, s_out);

  // count
  std::string count_in;
  std::optional<double> count_lo, count_hi, count_step;
  std::optional<int> count_bits;
  int count_ppu = 200;
  auto* count = app.add_subcommand("count", "Mode report for a mixture given as JSON");
  count->add_option("--mixture", count_in, "Mixture JSON {dim, centers, weights, normalized}")->required();
  count->add_option("--lo", count_lo, "Lower box corner in every coordinate (default min center - 6)");
  count->add_option("--hi", count_hi, "Upper box corner in every coordinate (default max center + 6)");
  count->add_option("--step", count_step, "1-D scan step (default min center gap / 8)");
  count->add_option("--bits", count_bits, "Mantissa bits")->check(CLI::Range(53, 960));
  count->add_option("--ppu", count_ppu, "Grid points per unit for d >= 2")->check(CLI::Range(1, 100000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*prop1) return finish_sweep(p1_out, gmodes::run_prop1(p1_n, policy_from(p1_bits)));
    if (*prop2) return finish_sweep(p2_out, gmodes::run_prop2(p2_n, policy_from(p2_bits)));
    if (*prop3) return finish_sweep(p3_out, gmodes::run_prop3(p3_n, p3_opt, policy_from(p3_bits, 128)));

    if (*bounds) {
      const auto rep = gmodes::cmd_bounds(gmodes::parse_grid(grid_spec), b_opt);
      std::ostringstream s;
      if (b_out.format == "json") {
        s << gmodes::to_json(rep).dump(2) << '\n';
      } else {
        gmodes::write_bounds_csv(s, rep);
      }
      emit(b_out, s.str());
      for (const auto& [d, from] : rep.proxy_valid_from) {
        std::cerr << "edge proxy d=" << d << ": ";
        if (from) std::cerr << "valid for grid a >= " << *from << '\n';
        else std::cerr << "not valid at the largest grid a\n";
      }
      if (rep.violations) std::cerr << "violations: " << rep.violations << '\n';
      return rep.violations ? kViolation : kOk;
    }

    if (*plot) {
      std::optional<gmodes::Mixture<double>> m;
      double big_a = 0;
      if (construction == "Gamma") {
        if (plot_n < 1) throw std::invalid_argument("Gamma needs N >= 1");
        m.emplace(gmodes::make_Gamma<double>(plot_n));
        big_a = m->bound_box()->half_width;
      } else {
        const double a = plot_a ? *plot_a : gmodes::critical_spacing<double>(std::max(plot_n, 1));
        m.emplace(construction == "gamma" ? gmodes::make_gamma(a, plot_n) : gmodes::make_faN(a, plot_n));
        big_a = a * plot_n;
      }
      const double lo = plot_lo ? *plot_lo : -(big_a + 1);
      const double hi = plot_hi ? *plot_hi : big_a + 1;
      const auto data = gmodes::cmd_plot(*m, lo, hi, plot_samples, plot_path);
      std::cerr << "wrote " << plot_path << " (" << data.x.size() << " samples, " << data.modes.size()
                << " modes)\n";
      return kOk;
    }

    if (*slope) {
      std::ifstream f(slope_in);
      if (!f) throw std::runtime_error("cannot read '" + slope_in + "'");
      auto records = gmodes::read_csv(f);
      if (slope_field == "certified_count")
        for (auto& r : records) r.mode_count = r.certified_count;
      const auto fit = gmodes::fit_slope(records);
      std::ostringstream s;
      if (s_out.format == "json") {
        s << gmodes::to_json(fit).dump(2) << '\n';
      } else {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", fit.slope, fit.intercept, fit.r_squared);
        s << "slope,intercept,r_squared\n" << buf;
      }
      emit(s_out, s.str());
      return kOk;
    }

    if (*count) {
      std::ifstream f(count_in);
      if (!f) throw std::runtime_error("cannot read '" + count_in + "'");
      const auto j = nlohmann::json::parse(f);
      const auto md = gmodes::mixture_from_json<double>(j);
      const auto& cd = md.centers_double();
      const double cmin = *std::min_element(cd.begin(), cd.end());
      const double cmax = *std::max_element(cd.begin(), cd.end());
      const double lo = count_lo ? *count_lo : cmin - 6;
      const double hi = count_hi ? *count_hi : cmax + 6;
      const int bits = count_bits ? *count_bits : 53;
      const auto report = gmodes::with_backend(bits, [&]<class Real>(const gmodes::PrecisionContext& ctx) {
        const auto m = gmodes::mixture_from_json<Real>(j);
        if (m.dim() == 1) {
          std::vector<double> c(cd);
          std::sort(c.begin(), c.end());
          double gap = std::numeric_limits<double>::infinity();
          for (std::size_t i = 1; i < c.size(); ++i)
            if (c[i] > c[i - 1]) gap = std::min(gap, c[i] - c[i - 1]);
          const double step = count_step ? *count_step : (std::isfinite(gap) ? gap / 8 : 0.125);
          return gmodes::count_modes_1d(m, gmodes::Interval<Real>{Real(lo), Real(hi)}, Real(step), ctx);
        }
        const gmodes::Box box{std::vector<double>(m.dim(), lo), std::vector<double>(m.dim(), hi)};
        return gmodes::dense_grid_oracle(m, box, count_ppu, ctx);
      });
      std::cout << gmodes::to_json(report).dump(2) << '\n';
      return kOk;
    }
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
