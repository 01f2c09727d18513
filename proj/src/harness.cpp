#include "rann/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include "rann/rng.hpp"

namespace rann {

void SweepConfig::validate() const {
  if (widths.empty()) throw std::invalid_argument("SweepConfig: widths empty");
  for (std::size_t i = 1; i < widths.size(); ++i)
    if (widths[i] <= widths[i - 1])
      throw std::invalid_argument("SweepConfig: widths must be strictly increasing");
  if (widths.front() < 1)
    throw std::invalid_argument("SweepConfig: widths must be positive");
  if (repeats < 1) throw std::invalid_argument("SweepConfig: repeats must be >= 1");
  if (m_factor < 1) throw std::invalid_argument("SweepConfig: m_factor must be >= 1");
  if (!(freq_std > 0.0))
    throw std::invalid_argument("SweepConfig: freq_std must be > 0");
  if (eval_points < 2)
    throw std::invalid_argument("SweepConfig: eval_points must be >= 2");
  ridge.validate();
  if (const auto* pme = std::get_if<PmeProblem>(&problem)) {
    pme->params.validate();
    if (!(pme->t_horizon > 0.0))
      throw std::invalid_argument("SweepConfig: t_horizon must be > 0");
  } else {
    const auto& cns = std::get<CnsProblem>(problem);
    cns.params.validate();
    if (!(cns.t_horizon > 0.0))
      throw std::invalid_argument("SweepConfig: t_horizon must be > 0");
  }
}

namespace {

constexpr Eigen::Index kBlockRows = 8192;

struct EvalData {
  CollocationSet points;
  Eigen::MatrixXd reference;  // one column per field component
};

// Streams design rows through the Gram accumulator and fits each target
// column. Returns one report per column.
std::vector<FitReport> fit_streaming(const FeatureBank& bank,
                                     const CollocationSet& train,
                                     const RidgeConfig& ridge, bool with_bias) {
  const Eigen::Index m = train.size();
  const Eigen::Index f = bank.feature_count() + (with_bias ? 1 : 0);
  const Eigen::MatrixXd& targets = *train.targets;
  GramAccumulator acc(f, targets.cols());
  Eigen::MatrixXd block(std::min(kBlockRows, m), f);
  for (Eigen::Index row = 0; row < m; row += kBlockRows) {
    const Eigen::Index r = std::min(kBlockRows, m - row);
    design_rows(bank, train.t.segment(row, r), train.x.middleRows(row, r),
                with_bias, block.topRows(r));
    acc.add_block(block.topRows(r), targets.middleRows(row, r));
  }
  return acc.solve(ridge, with_bias);
}

Eigen::MatrixXd predict(const FeatureBank& bank,
                        const std::vector<WeightVector>& weights,
                        const CollocationSet& pts, bool with_bias) {
  const Eigen::Index m = pts.size();
  const Eigen::Index f = bank.feature_count() + (with_bias ? 1 : 0);
  Eigen::MatrixXd out(m, static_cast<Eigen::Index>(weights.size()));
  Eigen::MatrixXd block(std::min(kBlockRows, m), f);
  for (Eigen::Index row = 0; row < m; row += kBlockRows) {
    const Eigen::Index r = std::min(kBlockRows, m - row);
    design_rows(bank, pts.t.segment(row, r), pts.x.middleRows(row, r),
                with_bias, block.topRows(r));
    for (std::size_t c = 0; c < weights.size(); ++c) {
      Eigen::VectorXd w(f);
      w.head(bank.feature_count()) = weights[c].w;
      if (with_bias) w[f - 1] = weights[c].bias.value_or(0.0);
      out.col(static_cast<Eigen::Index>(c)).segment(row, r) =
          block.topRows(r) * w;
    }
  }
  return out;
}

EvalData make_eval_data(const SweepConfig& cfg) {
  const std::uint64_t seed = derive_seed(cfg.seed, kStreamEval);
  EvalData data;
  if (const auto* pme = std::get_if<PmeProblem>(&cfg.problem)) {
    const auto& par = pme->params;
    data.points = sample_collocation_pme(
        par.d, cfg.eval_points, {par.t0, par.t0 + pme->t_horizon}, seed);
    data.reference.resize(data.points.size(), 1);
    for (Eigen::Index i = 0; i < data.points.size(); ++i)
      data.reference(i, 0) =
          barenblatt(par, data.points.t[i], data.points.x.row(i).transpose());
  } else {
    const auto& cns = std::get<CnsProblem>(cfg.problem);
    const WaveProfile profile = integrate_wave(cns.params);
    const double s = profile.s;
    data.points = sample_collocation_shock(
        cfg.eval_points, cns.t_horizon, cns.params.xi_range,
        [s](double t) { return s * t; }, seed);
    data.reference.resize(data.points.size(), 2);
    for (Eigen::Index i = 0; i < data.points.size(); ++i) {
      const auto [v, u] =
          wave_to_spacetime(profile, data.points.t[i], data.points.x(i, 0));
      data.reference(i, 0) = v;
      data.reference(i, 1) = u;
    }
  }
  return data;
}

CollocationSet make_training_set(const SweepConfig& cfg, Eigen::Index m,
                                 std::uint64_t seed,
                                 const WaveProfile* profile) {
  if (const auto* pme = std::get_if<PmeProblem>(&cfg.problem)) {
    const auto& par = pme->params;
    CollocationSet pts = sample_collocation_pme(
        par.d, static_cast<std::size_t>(m), {par.t0, par.t0 + pme->t_horizon},
        seed);
    return pme_training_set(par, std::move(pts));
  }
  const auto& cns = std::get<CnsProblem>(cfg.problem);
  const double s = profile->s;
  CollocationSet pts = sample_collocation_shock(
      static_cast<std::size_t>(m), cns.t_horizon, cns.params.xi_range,
      [s](double t) { return s * t; }, seed);
  Eigen::MatrixXd targets(pts.size(), 2);
  for (Eigen::Index i = 0; i < pts.size(); ++i) {
    const auto [v, u] = wave_to_spacetime(*profile, pts.t[i], pts.x(i, 0));
    targets(i, 0) = v;
    targets(i, 1) = u;
  }
  pts.targets = std::move(targets);
  return pts;
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (double v : xs) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

// 95% two-sided Student-t quantiles by residual degrees of freedom.
double t_quantile_95(int dof) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447,
                                 2.365,  2.306, 2.262, 2.228, 2.201, 2.179,
                                 2.160,  2.145, 2.131, 2.120, 2.110, 2.101,
                                 2.093,  2.086, 2.080, 2.074, 2.069, 2.064,
                                 2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof < 1) return 12.706;
  if (dof <= 30) return table[dof - 1];
  return 1.96;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  SweepResult result;

  const auto* cns_problem = std::get_if<CnsProblem>(&cfg.problem);
  std::optional<WaveProfile> profile;
  if (cns_problem) profile = integrate_wave(cns_problem->params);

  const EvalData eval = make_eval_data(cfg);
  const int dim = std::holds_alternative<PmeProblem>(cfg.problem)
                      ? std::get<PmeProblem>(cfg.problem).params.d
                      : 1;

  const std::size_t n_cells = cfg.widths.size() * static_cast<std::size_t>(cfg.repeats);
  result.cells.resize(n_cells);
  auto run_cell = [&](std::size_t k) {
    const std::size_t wi = k / cfg.repeats;
    const int rep = static_cast<int>(k % cfg.repeats);
    const int width = cfg.widths[wi];
    const std::uint64_t cell_seed =
        derive_seed(cfg.seed, kStreamCell, wi * 1000003ULL + rep);
    SweepCell cell;
    cell.width = width;
    cell.repeat = rep;
    cell.seed = cell_seed;
    try {
      SamplerSpec sampler;
      sampler.kind = GaussianFourier{cfg.freq_std};
      sampler.d = dim;
      sampler.seed = derive_seed(cell_seed, kStreamHidden);
      FeatureBank bank = FeatureBank::from_samples(
          sample_hidden(sampler, static_cast<std::size_t>(width)),
          ActivationKind::Cos, 1.0 / std::sqrt(static_cast<double>(width)),
          /*fourier_pairs=*/true);

      const Eigen::Index m = static_cast<Eigen::Index>(cfg.m_factor) * width;
      const CollocationSet train = make_training_set(
          cfg, m, derive_seed(cell_seed, kStreamCollocation),
          profile ? &*profile : nullptr);

      const std::vector<FitReport> fits =
          fit_streaming(bank, train, cfg.ridge, cfg.with_bias);

      double mse = 0.0, neq = 0.0, cond = 0.0;
      std::vector<WeightVector> weights;
      for (const FitReport& f : fits) {
        mse += f.train_mse;
        neq = std::max(neq, f.normal_eq_residual);
        cond = std::max(cond, f.condition_estimate);
        weights.push_back(f.weights);
      }
      cell.train_mse = mse;
      cell.normal_eq_residual = neq;
      cell.cond_est = cond;

      const Eigen::MatrixXd pred =
          predict(bank, weights, eval.points, cfg.with_bias);
      cell.rel_l2 = relative_l2_error(pred, eval.reference);
    } catch (const std::exception& err) {
      cell.excluded = true;
      cell.note = err.what();
    }
    result.cells[k] = std::move(cell);
  };

  if (cfg.threads <= 1) {
    for (std::size_t k = 0; k < n_cells; ++k) run_cell(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(cfg.threads, static_cast<int>(n_cells));
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t k = next.fetch_add(1); k < n_cells; k = next.fetch_add(1))
          run_cell(k);
      });
    for (std::thread& th : pool) th.join();
  }
  for (const SweepCell& cell : result.cells)
    if (cell.excluded) ++result.exclusions;

  // Per-width aggregation over non-excluded repeats.
  for (int width : cfg.widths) {
    WidthSummary s;
    s.width = width;
    std::vector<double> errs;
    for (const SweepCell& cell : result.cells) {
      if (cell.width != width) continue;
      if (cell.excluded) {
        ++s.excluded;
        continue;
      }
      errs.push_back(cell.rel_l2);
    }
    if (!errs.empty()) {
      double mean = 0.0;
      for (double v : errs) mean += v;
      mean /= static_cast<double>(errs.size());
      s.mean_rel_l2 = mean;
      s.std_rel_l2 = sample_std(errs, mean);
    } else {
      s.mean_rel_l2 = std::numeric_limits<double>::quiet_NaN();
    }
    result.summary.push_back(s);
  }

  std::vector<WidthSummary> valid;
  for (const WidthSummary& s : result.summary)
    if (std::isfinite(s.mean_rel_l2) && s.mean_rel_l2 > 0.0) valid.push_back(s);
  if (valid.size() >= 3) result.slope = fit_loglog_slope(valid);
  return result;
}

SlopeFit fit_loglog_slope(const std::vector<WidthSummary>& summary) {
  std::vector<double> xs, ys;
  for (const WidthSummary& s : summary) {
    if (!std::isfinite(s.mean_rel_l2) || s.mean_rel_l2 <= 0.0) continue;
    xs.push_back(std::log(static_cast<double>(s.width)));
    ys.push_back(std::log(s.mean_rel_l2));
  }
  const int n = static_cast<int>(xs.size());
  if (n < 3) throw InsufficientData();
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  const double se =
      n > 2 ? std::sqrt(ss_res / (n - 2) / sxx) : std::numeric_limits<double>::infinity();
  const double half = t_quantile_95(n - 2) * se;
  fit.ci = {fit.slope - half, fit.slope + half};
  return fit;
}

TheoryReport theory_coefficient_report(const SweepConfig& cfg,
                                       const PsiSpec& psi,
                                       const HeavyTailPi& law, int p, int q) {
  cfg.validate();
  TheoryReport rep;
  double half_t = 0.0, half_x = 0.0;
  if (const auto* pme = std::get_if<PmeProblem>(&cfg.problem)) {
    rep.t_domain = pme->t_horizon;
    rep.domain_measure = 1.0;  // unit box (0,1)^d
    half_t = 0.5 * pme->t_horizon;
    half_x = 0.5;
    rep.c_pi = pi_normalization(law, pme->params.d);
  } else {
    const auto& cns = std::get<CnsProblem>(cfg.problem);
    rep.t_domain = cns.t_horizon;
    rep.domain_measure = cns.params.xi_range.length();
    half_t = 0.5 * cns.t_horizon;
    half_x = 0.5 * cns.params.xi_range.length();
    rep.c_pi = pi_normalization(law, 1);
  }
  rep.l_psi = l_psi_bound(psi, p, q, half_t, half_x);
  const double sup = activation_sup_norm(psi.activation, std::min(p + q, 2));
  rep.sigma_sup_sq = sup * sup;
  rep.derivative_terms = (p + 1) * (q + 1);
  rep.m_psi = rep.c_pi * rep.sigma_sup_sq * rep.t_domain * rep.domain_measure *
              static_cast<double>(rep.derivative_terms) * rep.l_psi;
  return rep;
}

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

void write_sweep_csv(const std::string& raw_path, const std::string& summary_path,
                     const SweepResult& result) {
  {
    std::ofstream os(raw_path);
    if (!os) throw std::runtime_error("write_sweep_csv: cannot open " + raw_path);
    os << "width,repeat,seed,rel_l2,train_mse,cond_est,excluded\n";
    for (const SweepCell& c : result.cells)
      os << c.width << ',' << c.repeat << ',' << c.seed << ',' << fmt(c.rel_l2)
         << ',' << fmt(c.train_mse) << ',' << fmt(c.cond_est) << ','
         << (c.excluded ? 1 : 0) << '\n';
  }
  std::ofstream os(summary_path);
  if (!os)
    throw std::runtime_error("write_sweep_csv: cannot open " + summary_path);
  os << "width,mean_rel_l2,std_rel_l2\n";
  for (const WidthSummary& s : result.summary)
    os << s.width << ',' << fmt(s.mean_rel_l2) << ',' << fmt(s.std_rel_l2)
       << '\n';
  if (result.slope)
    os << "slope," << fmt(result.slope->slope) << ','
       << fmt(result.slope->ci.lo) << ',' << fmt(result.slope->ci.hi) << '\n';
  else
    os << "slope,,,\n";
}

void write_sweep_svg(const std::string& path, const SweepResult& result) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_sweep_svg: cannot open " + path);
  std::vector<std::pair<double, double>> pts;  // (log10 N, log10 err)
  for (const WidthSummary& s : result.summary)
    if (std::isfinite(s.mean_rel_l2) && s.mean_rel_l2 > 0.0)
      pts.emplace_back(std::log10(static_cast<double>(s.width)),
                       std::log10(s.mean_rel_l2));
  const int w = 480, hgt = 360, pad = 48;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
     << hgt << "'>\n";
  if (pts.size() >= 2) {
    double x0 = pts.front().first, x1 = pts.back().first;
    double y0 = 1e300, y1 = -1e300;
    for (auto& p : pts) {
      y0 = std::min(y0, p.second);
      y1 = std::max(y1, p.second);
    }
    // room for the reference line
    const double c_ref = pts.front().second + 0.5 * pts.front().first;
    y0 = std::min(y0, c_ref - 0.5 * x1) - 0.1;
    y1 += 0.1;
    auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (w - 2 * pad); };
    auto py = [&](double y) {
      return hgt - pad - (y - y0) / (y1 - y0) * (hgt - 2 * pad);
    };
    os << "<rect x='" << pad << "' y='" << pad << "' width='" << w - 2 * pad
       << "' height='" << hgt - 2 * pad << "' fill='none' stroke='black'/>\n";
    // C/sqrt(N) reference through the first point
    os << "<line x1='" << px(x0) << "' y1='" << py(c_ref - 0.5 * x0) << "' x2='"
       << px(x1) << "' y2='" << py(c_ref - 0.5 * x1)
       << "' stroke='gray' stroke-dasharray='6,4'/>\n";
    os << "<polyline fill='none' stroke='steelblue' stroke-width='2' points='";
    for (auto& p : pts) os << px(p.first) << ',' << py(p.second) << ' ';
    os << "'/>\n";
    for (auto& p : pts)
      os << "<circle cx='" << px(p.first) << "' cy='" << py(p.second)
         << "' r='3' fill='steelblue'/>\n";
    if (result.slope)
      os << "<text x='" << pad + 8 << "' y='" << pad + 16
         << "' font-size='12'>slope " << result.slope->slope << "</text>\n";
    os << "<text x='" << w / 2 << "' y='" << hgt - 12
       << "' font-size='12' text-anchor='middle'>log10 N</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace rann
