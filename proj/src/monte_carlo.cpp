#include "pixelguard/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace pixelguard {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

constexpr std::int64_t kPulseChunk = std::int64_t{1} << 16;
constexpr std::int64_t kTallyChunk = std::int64_t{1} << 32;

// Pulse outcomes: honest or faked origin times which pixels fired.
struct Tally {
  std::int64_t h10 = 0, h01 = 0, h11 = 0;
  std::int64_t e10 = 0, e01 = 0, e11 = 0;

  Tally& operator+=(const Tally& o) {
    h10 += o.h10; h01 += o.h01; h11 += o.h11;
    e10 += o.e10; e01 += o.e01; e11 += o.e11;
    return *this;
  }
};

struct Model {
  double p_a, p_e, q1, q2;
  std::vector<double> cumulative;  // strategy weights
  std::vector<FakedState> strategies;
};

void run_pulses(const Model& m, Xoshiro256& rng, std::int64_t n, Tally& t) {
  const std::size_t last = m.strategies.size() - 1;
  for (std::int64_t i = 0; i < n; ++i) {
    if (rng.uniform() < m.p_a) {
      if (!(rng.uniform() < m.p_e)) continue;
      std::size_t k = 0;
      if (last > 0) {
        const double u = rng.uniform();
        while (k < last && u >= m.cumulative[k]) ++k;
      }
      const bool c1 = rng.uniform() < m.strategies[k].p_d1;
      const bool c2 = rng.uniform() < m.strategies[k].p_d2;
      t.e11 += c1 && c2;
      t.e10 += c1 && !c2;
      t.e01 += !c1 && c2;
    } else {
      const bool c1 = rng.uniform() < m.q1;
      const bool c2 = rng.uniform() < m.q2;
      t.h11 += c1 && c2;
      t.h10 += c1 && !c2;
      t.h01 += !c1 && c2;
    }
  }
}

// Exact multinomial draw of the six clicking outcomes over n pulses, as a
// chain of conditional binomials.
void run_tally(const Model& m, Xoshiro256& rng, std::int64_t n, Tally& t) {
  double e11 = 0.0, e10 = 0.0, e01 = 0.0;
  for (const auto& s : m.strategies) {
    e11 += s.weight * s.p_d1 * s.p_d2;
    e10 += s.weight * s.p_d1 * (1.0 - s.p_d2);
    e01 += s.weight * (1.0 - s.p_d1) * s.p_d2;
  }
  const double fa = m.p_a * m.p_e;
  const double honest = 1.0 - m.p_a;
  const std::array<double, 6> p{honest * m.q1 * (1.0 - m.q2), honest * (1.0 - m.q1) * m.q2,
                                honest * m.q1 * m.q2,         fa * e10,
                                fa * e01,                     fa * e11};
  std::array<std::int64_t*, 6> out{&t.h10, &t.h01, &t.h11, &t.e10, &t.e01, &t.e11};
  double mass = 1.0;
  std::int64_t left = n;
  for (std::size_t k = 0; k < p.size() && left > 0; ++k) {
    if (p[k] <= 0.0) continue;
    const double cond = std::clamp(p[k] / mass, 0.0, 1.0);
    std::int64_t draw = left;
    if (cond < 1.0) draw = std::binomial_distribution<std::int64_t>(left, cond)(rng);
    *out[k] += draw;
    left -= draw;
    mass -= p[k];
    if (mass <= 0.0) break;
  }
}

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed;
  const std::uint64_t base = splitmix64(x);
  std::uint64_t y = base ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL);
  for (auto& word : s_) word = splitmix64(y);
}

Xoshiro256::result_type Xoshiro256::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

SimOutcome simulate(const AttackStrategy& strategy, double p_e, double alpha, std::int64_t n_pulses,
                    std::uint64_t seed, const SimOptions& options) {
  strategy.validate();
  if (!(p_e >= 0.0 && p_e <= 1.0)) throw std::invalid_argument("p_E must be in [0,1]");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in [0,1)");
  if (n_pulses < 1) throw std::invalid_argument("n_pulses must be >= 1");
  const double q1 = (1.0 + alpha) * strategy.p_b;
  const double q2 = (1.0 - alpha) * strategy.p_b;
  if (q1 > 1.0) throw std::invalid_argument("(1 + alpha) p_B exceeds 1");

  Model m{strategy.p_a, p_e, q1, q2, {}, strategy.strategies};
  double acc = 0.0;
  for (const auto& s : m.strategies) m.cumulative.push_back(acc += s.weight);

  const bool tally = n_pulses > options.fast_path_above;
  const std::int64_t chunk = tally ? kTallyChunk : kPulseChunk;
  const std::int64_t chunks = (n_pulses + chunk - 1) / chunk;
  const auto workers = static_cast<std::int64_t>(std::clamp<std::int64_t>(options.workers, 1, chunks));

  auto work = [&](std::int64_t first, Tally& t) {
    for (std::int64_t c = first; c < chunks; c += workers) {
      Xoshiro256 rng(seed, static_cast<std::uint64_t>(c));
      const std::int64_t n = std::min(chunk, n_pulses - c * chunk);
      if (tally)
        run_tally(m, rng, n, t);
      else
        run_pulses(m, rng, n, t);
    }
  };
  std::vector<Tally> partial(static_cast<std::size_t>(workers));
  if (workers == 1) {
    work(0, partial[0]);
  } else {
    std::vector<std::thread> pool;
    for (std::int64_t w = 0; w < workers; ++w) pool.emplace_back(work, w, std::ref(partial[static_cast<std::size_t>(w)]));
    for (auto& th : pool) th.join();
  }
  Tally t;
  for (const auto& p : partial) t += p;

  SimOutcome out;
  out.seed = seed;
  out.counts = {n_pulses, t.h10 + t.h11 + t.e10 + t.e11, t.h01 + t.h11 + t.e01 + t.e11, t.h11 + t.e11};
  out.n_eve_known = t.e10 + t.e01 + 2 * t.e11;
  out.n_eve_events = t.e10 + t.e01 + t.e11;
  const std::int64_t clicks = out.counts.n_s1 + out.counts.n_s2;
  const std::int64_t events = t.h10 + t.h01 + t.h11 + out.n_eve_events;
  out.true_eve_info = clicks > 0 ? static_cast<double>(out.n_eve_known) / static_cast<double>(clicks) : 0.0;
  out.true_eve_event_info =
      events > 0 ? static_cast<double>(out.n_eve_events) / static_cast<double>(events) : 0.0;
  return out;
}

DetectionStats empirical_stats(const ClickCounts& counts) {
  if (counts.n_pulses == 0) throw std::invalid_argument("n_pulses = 0: no frequencies");
  counts.validate();
  const auto n = static_cast<double>(counts.n_pulses);
  return {static_cast<double>(counts.n_s1) / n, static_cast<double>(counts.n_s2) / n,
          static_cast<double>(counts.n_c) / n};
}

}  // namespace pixelguard
