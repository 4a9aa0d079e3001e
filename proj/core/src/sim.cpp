#include "sprt_exact/sim.hpp"

#include "sprt_exact/error.hpp"
#include "sprt_exact/parallel.hpp"

#include <cmath>
#include <random>

namespace sprt_exact {
namespace {

constexpr std::uint64_t kBlockSize = 8192;

RandomStream block_stream(std::uint64_t seed, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  return RandomStream(seq);
}

struct Tally {
  std::uint64_t done = 0;
  std::uint64_t capped = 0;
  std::uint64_t rejected = 0;
  std::uint64_t accepted = 0;
  double sum_n = 0.0;
  double sum_n2 = 0.0;
  std::vector<double> sum_z;
  std::vector<double> sum_z2;

  void merge(const Tally& o) {
    done += o.done;
    capped += o.capped;
    rejected += o.rejected;
    accepted += o.accepted;
    sum_n += o.sum_n;
    sum_n2 += o.sum_n2;
    for (std::size_t i = 0; i < sum_z.size(); ++i) {
      sum_z[i] += o.sum_z[i];
      sum_z2[i] += o.sum_z2[i];
    }
  }
};

Estimate mean_of(double sum, double sum2, std::uint64_t n) {
  if (n == 0) return Estimate{std::nan(""), std::nan("")};
  const double m = sum / static_cast<double>(n);
  if (n < 2) return Estimate{m, 0.0};
  const double var = std::max(0.0, (sum2 - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
  return Estimate{m, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace

SimResult run(const TestProblem& problem, const Boundaries& bounds, Hypothesis h, const SimConfig& config,
              const std::vector<double>& z_points) {
  if (!(bounds.a < 0.0 && bounds.b > 0.0)) throw Error(ErrorKind::InvalidArgument, "simulation needs a < 0 < b");
  if (config.replications < 1 || config.max_steps < 1) {
    throw Error(ErrorKind::InvalidArgument, "replications and max_steps must be positive");
  }
  for (double z : z_points) {
    if (!(z > 0.0 && z <= 1.0)) throw Error(ErrorKind::InvalidArgument, "z points must lie in (0,1]");
  }
  const PhaseTypeSampler draw(h == Hypothesis::H0 ? problem.ph0() : problem.ph1());
  const double theta = problem.theta();
  const double d = problem.d();
  const std::size_t nz = z_points.size();
  const std::uint64_t blocks = (config.replications + kBlockSize - 1) / kBlockSize;

  std::vector<Tally> tallies(blocks);
  parallel_for(blocks, [&](std::size_t blk) {
    Tally& t = tallies[blk];
    t.sum_z.assign(nz, 0.0);
    t.sum_z2.assign(nz, 0.0);
    RandomStream rng = block_stream(config.seed, blk);
    const std::uint64_t first = blk * kBlockSize;
    const std::uint64_t count = std::min(kBlockSize, config.replications - first);
    for (std::uint64_t r = 0; r < count; ++r) {
      double llr = 0.0;
      std::uint64_t n = 0;
      while (llr > bounds.a && llr < bounds.b && n < config.max_steps) {
        llr += theta * draw(rng) - d;
        ++n;
      }
      if (llr > bounds.a && llr < bounds.b) {
        ++t.capped;
        continue;
      }
      ++t.done;
      (llr <= bounds.a ? t.rejected : t.accepted) += 1;
      const double dn = static_cast<double>(n);
      t.sum_n += dn;
      t.sum_n2 += dn * dn;
      for (std::size_t i = 0; i < nz; ++i) {
        const double zn = std::pow(z_points[i], dn);
        t.sum_z[i] += zn;
        t.sum_z2[i] += zn * zn;
      }
    }
  });

  Tally total;
  total.sum_z.assign(nz, 0.0);
  total.sum_z2.assign(nz, 0.0);
  for (const auto& t : tallies) total.merge(t);
  if (total.done == 0) throw Error(ErrorKind::AllCapped, "every replication hit max_steps");

  const auto frac = [&](std::uint64_t k) {
    const double p = static_cast<double>(k) / static_cast<double>(total.done);
    return Estimate{p, std::sqrt(p * (1.0 - p) / static_cast<double>(total.done))};
  };
  SimResult out{config.replications, total.capped, frac(total.rejected), frac(total.accepted),
                std::nullopt, std::nullopt, mean_of(total.sum_n, total.sum_n2, total.done), {}};
  if (h == Hypothesis::H0) {
    out.alpha0_hat = out.reject_h0;
  } else {
    out.alpha1_hat = out.accept_h0;
  }
  for (std::size_t i = 0; i < nz; ++i) {
    out.pgf_at.emplace_back(z_points[i], mean_of(total.sum_z[i], total.sum_z2[i], total.done));
  }
  return out;
}

std::vector<std::pair<std::uint64_t, double>> sample_path(const TestProblem& problem, Hypothesis h,
                                                          std::uint64_t steps, std::uint64_t seed) {
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "steps must be positive");
  const PhaseTypeSampler draw(h == Hypothesis::H0 ? problem.ph0() : problem.ph1());
  RandomStream rng = block_stream(seed, 0);
  std::vector<std::pair<std::uint64_t, double>> path;
  path.reserve(steps + 1);
  double llr = 0.0;
  path.emplace_back(0, llr);
  for (std::uint64_t k = 1; k <= steps; ++k) {
    llr += problem.theta() * draw(rng) - problem.d();
    path.emplace_back(k, llr);
  }
  return path;
}

}  // namespace sprt_exact
