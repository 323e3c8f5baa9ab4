#include "qac/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>

#include "qac/errors.hpp"
#include "qac/simd/kernels.hpp"

namespace qac {

void GridSpec::validate() const {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw ConfigError("grid.half_width must be > 0, got " + std::to_string(half_width));
  if (points < 3) throw ConfigError("grid.points must be >= 3, got " + std::to_string(points));
}

TridiagonalMatrix discretize_hamiltonian(const OscillatorParams& params, const GridSpec& grid) {
  grid.validate();
  const double h = grid.spacing();
  const double kinetic = 1.0 / (params.m * h * h);
  TridiagonalMatrix t;
  t.mass = params.m;
  t.grid = grid;
  t.diag.resize(grid.points);
  t.off.assign(grid.points - 1, -0.5 * kinetic);
  for (int i = 0; i < grid.points; ++i) {
    const double q = grid.node(i);
    t.diag[i] = kinetic + 0.5 * params.a * q * q + params.potential(q);
  }
  return t;
}

std::vector<double> lowest_eigenvalues(const TridiagonalMatrix& matrix, int count) {
  const std::size_t n = matrix.size();
  if (count < 1 || static_cast<std::size_t>(count) > n)
    throw ConfigError("requested " + std::to_string(count) + " eigenvalues of a " +
                      std::to_string(n) + "x" + std::to_string(n) + " matrix");

  std::vector<double> off_sq(n > 0 ? n - 1 : 0);
  double max_off_sq = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    off_sq[i] = matrix.off[i] * matrix.off[i];
    max_off_sq = std::max(max_off_sq, off_sq[i]);
  }
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, max_off_sq);

  // Gershgorin enclosure.
  double lower = std::numeric_limits<double>::infinity();
  double upper = -lower;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(matrix.off[i - 1]);
    if (i + 1 < n) radius += std::abs(matrix.off[i]);
    lower = std::min(lower, matrix.diag[i] - radius);
    upper = std::max(upper, matrix.diag[i] + radius);
  }
  const double span = std::max(std::abs(lower), std::abs(upper));
  lower -= 4.0 * std::numeric_limits<double>::epsilon() * span + 2.0 * pivmin;
  upper += 4.0 * std::numeric_limits<double>::epsilon() * span + 2.0 * pivmin;

  const auto& k = simd::kernels();
  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<double> out(count);

  // Four eigenvalue indices are bisected side by side, one per lane.
  for (int first = 0; first < count; first += 4) {
    std::int64_t target[4];
    double lo[4], hi[4], mid[4];
    for (int lane = 0; lane < 4; ++lane) {
      target[lane] = std::min(first + lane, count - 1);
      lo[lane] = lower;
      hi[lane] = upper;
    }
    for (int iter = 0; iter < 256; ++iter) {
      bool done = true;
      for (int lane = 0; lane < 4; ++lane) {
        mid[lane] = 0.5 * (lo[lane] + hi[lane]);
        const double tol = 2.0 * eps * std::max(std::abs(lo[lane]), std::abs(hi[lane])) + pivmin;
        if (hi[lane] - lo[lane] > tol) done = false;
      }
      if (done) break;
      std::int64_t below[4];
      k.sturm_count4(matrix.diag.data(), off_sq.data(), n, mid, pivmin, below);
      for (int lane = 0; lane < 4; ++lane) {
        if (below[lane] > target[lane])
          hi[lane] = mid[lane];
        else
          lo[lane] = mid[lane];
      }
    }
    for (int lane = 0; lane < 4 && first + lane < count; ++lane)
      out[first + lane] = 0.5 * (lo[lane] + hi[lane]);
  }
  return out;
}

std::vector<double> eigenvector(const TridiagonalMatrix& matrix, double eigenvalue) {
  const std::size_t n = matrix.size();
  // LU with partial pivoting of T - lambda I (row interchanges only between
  // neighbours, so U has two superdiagonals).
  std::vector<double> dl(matrix.off), d(n), du(matrix.off), du2(n, 0.0);
  std::vector<bool> swapped(n, false);
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = matrix.diag[i] - eigenvalue;
    norm = std::max(norm, std::abs(matrix.diag[i]) + 2.0 * (i < n - 1 ? std::abs(matrix.off[i]) : 0.0));
  }
  const double tiny = std::numeric_limits<double>::epsilon() * std::max(norm, 1.0);

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) d[i] = tiny;
      const double fact = dl[i] / d[i];
      dl[i] = fact;
      d[i + 1] -= fact * du[i];
    } else {
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      dl[i] = fact;
      const double temp = du[i];
      du[i] = d[i + 1];
      d[i + 1] = temp - fact * d[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -fact * du[i + 1];
      }
      swapped[i] = true;
    }
  }
  if (d[n - 1] == 0.0) d[n - 1] = tiny;

  auto solve = [&](std::vector<double>& b) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!swapped[i]) {
        b[i + 1] -= dl[i] * b[i];
      } else {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl[i] * b[i];
      }
    }
    b[n - 1] /= d[n - 1];
    if (n >= 2) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t j = n - 2; j-- > 0;)
      b[j] = (b[j] - du[j] * b[j + 1] - du2[j] * b[j + 2]) / d[j];
  };
  auto normalize = [](std::vector<double>& v) {
    const double s = std::sqrt(simd::dot(v, v));
    for (double& x : v) x /= s;
  };

  std::vector<double> v(n, 1.0);
  for (int iter = 0; iter < 3; ++iter) {
    solve(v);
    normalize(v);
  }
  return v;
}

double tail_mass(const TridiagonalMatrix& matrix, std::span<const double> vec, double outer_fraction) {
  const double cutoff = (1.0 - outer_fraction) * matrix.grid.half_width;
  double tail = 0.0, total = 0.0;
  for (std::size_t i = 0; i < vec.size(); ++i) {
    const double w = vec[i] * vec[i];
    total += w;
    if (std::abs(matrix.grid.node(static_cast<int>(i))) > cutoff) tail += w;
  }
  return total > 0.0 ? tail / total : 0.0;
}

Spectrum compute_spectrum(const TridiagonalMatrix& matrix, int levels) {
  if (levels < 2) throw ConfigError("spectrum needs at least 2 levels, got " + std::to_string(levels));
  Spectrum s;
  s.eigenvalues = lowest_eigenvalues(matrix, levels);
  const double tol = 1e-10 * std::max(1.0, std::abs(s.eigenvalues.back()));
  s.gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < s.eigenvalues.size(); ++i) {
    const double g = s.eigenvalues[i + 1] - s.eigenvalues[i];
    if (!(g > tol))
      throw DegeneracyError("levels " + std::to_string(i) + " and " + std::to_string(i + 1) +
                            " are not separated (gap " + std::to_string(g) +
                            "); grid too coarse or half-width too small");
    if (g < s.gap) {
      s.gap = g;
      s.gap_index = i;
    }
  }
  s.rigidity = matrix.mass * s.gap * s.gap;
  return s;
}

double automatic_half_width(const OscillatorParams& params, int levels) {
  double width = 10.0 * std::pow(params.m * params.a, -0.25);
  if (!params.harmonic) {
    const double n = levels + 0.5;
    const double estimate = n * std::sqrt(params.a / params.m) +
                            2.0 * std::pow(n, 4.0 / 3.0) * std::cbrt(params.b2 / (params.m * params.m));
    width = std::max(width, 3.0 * std::pow(estimate / params.b2, 0.25));
  }
  return width;
}

SolvedSpectrum single_site_spectrum(const OscillatorParams& params, const SpectrumOptions& options) {
  params.validate();
  GridSpec grid{options.half_width.value_or(automatic_half_width(params, options.levels)),
                options.points};
  grid.validate();
  SolvedSpectrum out;
  for (int attempt = 0;; ++attempt) {
    const TridiagonalMatrix t = discretize_hamiltonian(params, grid);
    out.spectrum = compute_spectrum(t, options.levels);
    const auto top = eigenvector(t, out.spectrum.eigenvalues.back());
    out.tail_mass = tail_mass(t, top);
    out.grid = grid;
    out.doublings = attempt;
    if (out.tail_mass < options.tail_floor) return out;
    if (attempt == options.max_doublings)
      throw ConvergenceError("spectral", "eigenvector " + std::to_string(options.levels - 1) +
                                             " still has tail mass " + std::to_string(out.tail_mass) +
                                             " at half-width " + std::to_string(grid.half_width));
    grid.half_width *= 2.0;
    grid.points = 2 * grid.points + 1;  // keeps the spacing
  }
}

RigidityScan rigidity_mass_scan(const OscillatorParams& base, std::span<const double> masses,
                                const SpectrumOptions& options, int threads) {
  if (masses.empty()) throw ConfigError("rigidity scan needs at least one mass");
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (!(masses[i] > 0.0)) throw ConfigError("rigidity scan masses must be positive");
    if (i > 0 && !(masses[i] < masses[i - 1]))
      throw ConfigError("rigidity scan masses must be strictly decreasing");
  }

  auto evaluate = [&](double m) {
    OscillatorParams p = base;
    p.m = m;
    const Spectrum s = single_site_spectrum(p, options).spectrum;
    return RigidityPoint{m, s.gap, s.rigidity};
  };

  RigidityScan scan;
  scan.points.resize(masses.size());
  const std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
  for (std::size_t start = 0; start < masses.size(); start += workers) {
    std::vector<std::future<RigidityPoint>> batch;
    const std::size_t stop = std::min(masses.size(), start + workers);
    for (std::size_t i = start; i < stop; ++i)
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred,
                                 evaluate, masses[i]));
    for (std::size_t i = start; i < stop; ++i) scan.points[i] = batch[i - start].get();
  }

  const double smallest = masses.back();
  if (masses.front() >= 10.0 * smallest * (1.0 - 1e-12)) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (const auto& p : scan.points) {
      if (p.m > 10.0 * smallest * (1.0 + 1e-12)) continue;
      const double x = std::log(p.m), y = std::log(p.rigidity);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++count;
    }
    if (count >= 2) scan.small_mass_slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  }
  return scan;
}

}  // namespace qac
