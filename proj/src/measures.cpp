#include "qha/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "qha/parallel.hpp"
#include "qha/rng.hpp"

namespace qha {

namespace {

double ls_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return 0.0;
  return sxy / sxx;
}

}  // namespace

const char* measure_kind_name(MeasureKind k) {
  switch (k) {
    case MeasureKind::dirac: return "dirac";
    case MeasureKind::atom_list: return "atom-list";
    case MeasureKind::circle: return "circle";
    case MeasureKind::cantor: return "cantor";
    case MeasureKind::reweighted: return "reweighted";
  }
  return "unknown";
}

cd DiscreteMeasure::total_mass() const {
  return pairwise_sum(std::span<const cd>(weights));
}

double DiscreteMeasure::total_variation() const {
  std::vector<double> a(weights.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(weights[i]);
  return pairwise_sum(std::span<const double>(a));
}

DiscreteMeasure make_dirac(PhasePoint z0) {
  DiscreteMeasure mu;
  mu.kind = MeasureKind::dirac;
  mu.atoms = {z0};
  mu.weights = {cd(1.0, 0.0)};
  mu.center = z0;
  mu.radius_bound = 0.0;
  return mu;
}

DiscreteMeasure make_atoms(std::vector<PhasePoint> atoms, std::vector<cd> weights) {
  if (atoms.empty()) throw std::invalid_argument("make_atoms: atom list must be non-empty");
  if (atoms.size() != weights.size())
    throw std::invalid_argument("make_atoms: atoms and weights must have equal length");
  DiscreteMeasure mu;
  mu.kind = MeasureKind::atom_list;
  mu.atoms = std::move(atoms);
  mu.weights = std::move(weights);
  double xlo = mu.atoms[0].x, xhi = xlo, klo = mu.atoms[0].xi, khi = klo;
  for (const auto& z : mu.atoms) {
    xlo = std::min(xlo, z.x);
    xhi = std::max(xhi, z.x);
    klo = std::min(klo, z.xi);
    khi = std::max(khi, z.xi);
  }
  mu.center = {0.5 * (xlo + xhi), 0.5 * (klo + khi)};
  double r = 0.0;
  for (const auto& z : mu.atoms) r = std::max(r, abs(z - mu.center));
  mu.radius_bound = r;
  return mu;
}

DiscreteMeasure make_circle(double radius, int nodes, double mass) {
  if (!(radius > 0.0)) throw std::invalid_argument("make_circle: radius must be > 0");
  if (nodes < 8) throw std::invalid_argument("make_circle: need at least 8 nodes");
  if (!(mass > 0.0)) throw std::invalid_argument("make_circle: mass must be > 0");
  DiscreteMeasure mu;
  mu.kind = MeasureKind::circle;
  mu.atoms.resize(nodes);
  mu.weights.assign(nodes, cd(mass / nodes, 0.0));
  for (int k = 0; k < nodes; ++k) {
    const double th = 2.0 * PI * k / nodes;
    mu.atoms[k] = {radius * std::cos(th), radius * std::sin(th)};
  }
  mu.center = {0.0, 0.0};
  mu.radius_bound = radius;
  return mu;
}

DiscreteMeasure make_cantor(int level) {
  if (level < 0) throw std::invalid_argument("make_cantor: level must be >= 0");
  if (level > 12)
    throw std::invalid_argument("make_cantor: level > 12 would exceed 16M atoms; refusing");
  const int npa = 1 << level;  // per-axis atom count
  std::vector<double> mid(npa);
  for (int w = 0; w < npa; ++w) {
    double left = 0.0, width = 1.0;
    for (int j = 0; j < level; ++j) {
      width /= 3.0;
      if ((w >> (level - 1 - j)) & 1) left += 2.0 * width;
    }
    mid[w] = left + 0.5 * width - 0.5;  // interval midpoint, centered at the origin
  }
  DiscreteMeasure mu;
  mu.kind = MeasureKind::cantor;
  const double wgt = 1.0 / (static_cast<double>(npa) * npa);
  mu.atoms.reserve(static_cast<std::size_t>(npa) * npa);
  mu.weights.assign(static_cast<std::size_t>(npa) * npa, cd(wgt, 0.0));
  for (int ix = 0; ix < npa; ++ix)
    for (int ik = 0; ik < npa; ++ik) mu.atoms.push_back({mid[ix], mid[ik]});
  mu.center = {0.0, 0.0};
  double r = 0.0;
  for (const auto& z : mu.atoms) r = std::max(r, abs(z));
  mu.radius_bound = r;
  return mu;
}

DiscreteMeasure reweight(const DiscreteMeasure& base, PhasePoint z0) {
  DiscreteMeasure mu = base;
  mu.kind = MeasureKind::reweighted;
  for (std::size_t j = 0; j < mu.size(); ++j)
    mu.weights[j] *= std::exp(-0.5 * PI * abs2(mu.atoms[j] - z0));
  return mu;
}

std::vector<cd> fourier_of_measure(const DiscreteMeasure& mu,
                                   std::span<const PhasePoint> targets, int workers) {
  const std::size_t n = mu.size();
  std::vector<cd> out(targets.size());
  parallel_for(targets.size(), workers, [&](std::size_t t) {
    const PhasePoint zeta = targets[t];
    std::vector<cd> terms(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double ph = -2.0 * PI * symplectic_form(zeta, mu.atoms[j]);
      terms[j] = mu.weights[j] * cd(std::cos(ph), std::sin(ph));
    }
    out[t] = pairwise_sum(std::span<const cd>(terms));
  });
  return out;
}

std::pair<cd, cd> parseval_measures(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const std::vector<cd> fmu_at_nu =
      fourier_of_measure(mu, std::span<const PhasePoint>(nu.atoms));
  const std::vector<cd> fnu_at_mu =
      fourier_of_measure(nu, std::span<const PhasePoint>(mu.atoms));
  std::vector<cd> lt(nu.size()), rt(mu.size());
  for (std::size_t k = 0; k < nu.size(); ++k) lt[k] = std::conj(nu.weights[k]) * fmu_at_nu[k];
  for (std::size_t j = 0; j < mu.size(); ++j) rt[j] = mu.weights[j] * std::conj(fnu_at_mu[j]);
  return {pairwise_sum(std::span<const cd>(lt)), pairwise_sum(std::span<const cd>(rt))};
}

RegularityReport regularity_estimates(const DiscreteMeasure& mu, int ray_count,
                                      int radius_samples, std::uint64_t seed, int workers,
                                      const RegularityOptions& opt) {
  if (ray_count < 1) throw std::invalid_argument("regularity_estimates: ray_count must be >= 1");
  if (radius_samples < 2)
    throw std::invalid_argument("regularity_estimates: radius_samples must be >= 2");
  RegularityReport rep;
  const std::size_t n = mu.size();

  // --- ball-mass exponent ---
  if (n >= 2 && mu.radius_bound > 0.0) {
    const double rlo = opt.radius_lo_factor * mu.radius_bound;
    const double rhi = opt.radius_hi_factor * mu.radius_bound;
    std::vector<double> radii(radius_samples);
    for (int t = 0; t < radius_samples; ++t)
      radii[t] = rlo * std::pow(rhi / rlo, static_cast<double>(t) / (radius_samples - 1));

    std::vector<std::size_t> centers(n);
    std::iota(centers.begin(), centers.end(), std::size_t{0});
    std::size_t nc = n;
    if (n > static_cast<std::size_t>(opt.max_centers)) {
      Rng rng(seed ^ 0xA5A5A5A5DEADBEEFull);
      nc = static_cast<std::size_t>(opt.max_centers);
      for (std::size_t i = 0; i < nc; ++i)
        std::swap(centers[i], centers[i + rng.next_below(n - i)]);
      centers.resize(nc);
    }

    std::vector<double> mass(nc * radius_samples), count(nc * radius_samples);
    parallel_for(nc, workers, [&](std::size_t c) {
      std::vector<double> dist(n);
      for (std::size_t j = 0; j < n; ++j) dist[j] = abs(mu.atoms[j] - mu.atoms[centers[c]]);
      for (int t = 0; t < radius_samples; ++t) {
        double m = 0.0, cnt = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          if (dist[j] <= radii[t]) {
            m += std::abs(mu.weights[j]);
            cnt += 1.0;
          }
        mass[c * radius_samples + t] = m;
        count[c * radius_samples + t] = cnt;
      }
    });

    // A radius scale is informative only when balls typically capture more
    // than the center atom yet less than the whole measure.
    std::vector<int> usable;
    for (int t = 0; t < radius_samples; ++t) {
      double mean_cnt = 0.0;
      for (std::size_t c = 0; c < nc; ++c) mean_cnt += count[c * radius_samples + t];
      mean_cnt /= static_cast<double>(nc);
      if (mean_cnt >= 3.0 && mean_cnt <= 0.9 * static_cast<double>(n)) usable.push_back(t);
    }
    std::vector<int> fit_scales = usable;
    if (fit_scales.size() < 2) {
      fit_scales.resize(radius_samples);
      std::iota(fit_scales.begin(), fit_scales.end(), 0);
    }

    double slope_sum = 0.0;
    std::size_t used_centers = 0;
    for (std::size_t c = 0; c < nc; ++c) {
      std::vector<double> lx, ly;
      for (int t : fit_scales) {
        const double m = mass[c * radius_samples + t];
        if (m > 0.0) {
          lx.push_back(std::log(radii[t]));
          ly.push_back(std::log(m));
        }
      }
      if (lx.size() >= 2) {
        slope_sum += ls_slope(lx, ly);
        ++used_centers;
      }
    }
    if (used_centers > 0) {
      rep.alpha_hat = slope_sum / static_cast<double>(used_centers);
      rep.alpha_scales_used = static_cast<int>(usable.size());
      rep.alpha_reliable = usable.size() >= 3 && n >= 16;
    }
  }

  // --- Fourier decay exponent ---
  {
    const int nb = std::max(2, static_cast<int>(std::llround(std::log2(opt.freq_hi / opt.freq_lo))));
    const int mpb = std::max(1, opt.moduli_per_bin);
    std::vector<double> edges(nb + 1);
    for (int b = 0; b <= nb; ++b)
      edges[b] = opt.freq_lo * std::pow(opt.freq_hi / opt.freq_lo, static_cast<double>(b) / nb);

    Rng rng(seed ^ 0x5EEDF00DCAFE1234ull);
    std::vector<double> theta(ray_count);
    for (int i = 0; i < ray_count; ++i)
      theta[i] = 2.0 * PI * (i + rng.next_double()) / ray_count;

    std::vector<PhasePoint> targets;
    std::vector<double> moduli;
    targets.reserve(static_cast<std::size_t>(nb) * mpb * ray_count);
    for (int b = 0; b < nb; ++b)
      for (int s = 0; s < mpb; ++s) {
        const double t = edges[b] * std::pow(edges[b + 1] / edges[b], (s + 0.5) / mpb);
        moduli.push_back(t);
        for (int i = 0; i < ray_count; ++i)
          targets.push_back({t * std::cos(theta[i]), t * std::sin(theta[i])});
      }
    const std::vector<cd> vals =
        fourier_of_measure(mu, std::span<const PhasePoint>(targets), workers);

    std::vector<double> lx, ly;
    bool all_bins = true;
    for (int b = 0; b < nb; ++b) {
      double best = 0.0, best_t = edges[b];
      for (int s = 0; s < mpb; ++s)
        for (int i = 0; i < ray_count; ++i) {
          const std::size_t idx = (static_cast<std::size_t>(b) * mpb + s) * ray_count + i;
          const double a = std::abs(vals[idx]);
          if (a > best) {
            best = a;
            best_t = moduli[static_cast<std::size_t>(b) * mpb + s];
          }
        }
      if (best > 0.0) {
        lx.push_back(std::log(best_t));
        ly.push_back(std::log(best));
      } else {
        all_bins = false;
      }
    }
    if (lx.size() >= 2) {
      rep.beta_hat = -2.0 * ls_slope(lx, ly);
      rep.beta_reliable = all_bins && nb >= 3;
    }
  }
  return rep;
}

namespace {

DiscreteMeasure measure_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "dirac") {
    return make_dirac({j.value("x", 0.0), j.value("xi", 0.0)});
  }
  if (kind == "circle") {
    return make_circle(j.at("radius").get<double>(), j.at("nodes").get<int>(),
                       j.value("mass", 1.0));
  }
  if (kind == "cantor") {
    return make_cantor(j.at("level").get<int>());
  }
  if (kind == "atoms") {
    if (j.contains("csv")) return read_atoms_csv(j.at("csv").get<std::string>());
    std::vector<PhasePoint> atoms;
    std::vector<cd> weights;
    for (const auto& row : j.at("atoms")) {
      if (!row.is_array() || row.size() < 3 || row.size() > 4)
        throw std::invalid_argument("measure json: each atom must be [x, xi, re_w] or [x, xi, re_w, im_w]");
      atoms.push_back({row[0].get<double>(), row[1].get<double>()});
      weights.emplace_back(row[2].get<double>(), row.size() == 4 ? row[3].get<double>() : 0.0);
    }
    return make_atoms(std::move(atoms), std::move(weights));
  }
  if (kind == "reweight") {
    return reweight(measure_from_json(j.at("base")), {j.value("x", 0.0), j.value("xi", 0.0)});
  }
  throw std::invalid_argument("measure json: unknown kind '" + kind +
                              "'; valid kinds: dirac, circle, cantor, atoms, reweight");
}

}  // namespace

DiscreteMeasure measure_from_json_text(const std::string& text) {
  return measure_from_json(nlohmann::json::parse(text));
}

void write_atoms_csv(const DiscreteMeasure& mu, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_atoms_csv: cannot open " + path);
  std::fprintf(f, "x,xi,re_w,im_w\n");
  for (std::size_t j = 0; j < mu.size(); ++j)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", mu.atoms[j].x, mu.atoms[j].xi,
                 mu.weights[j].real(), mu.weights[j].imag());
  std::fclose(f);
}

DiscreteMeasure read_atoms_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_atoms_csv: cannot open " + path);
  std::vector<PhasePoint> atoms;
  std::vector<cd> weights;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double x, xi, re, im;
    if (std::sscanf(line.c_str(), " %lf , %lf , %lf , %lf", &x, &xi, &re, &im) == 4) {
      atoms.push_back({x, xi});
      weights.emplace_back(re, im);
    }
    // non-numeric lines (the header) are skipped
  }
  if (atoms.empty()) throw std::runtime_error("read_atoms_csv: no atom rows in " + path);
  return make_atoms(std::move(atoms), std::move(weights));
}

}  // namespace qha
