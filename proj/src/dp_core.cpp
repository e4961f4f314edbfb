#include "bidopt/dp_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace bidopt {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = kFnvOffset;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= kFnvPrime;
  }
  return hash;
}

void check_landscape(const LandscapeModel& landscape) {
  if (landscape.delta_max < 1 || landscape.pdf.size() != static_cast<std::size_t>(landscape.delta_max) + 1)
    throw std::invalid_argument("landscape model is not well-formed");
}

// Largest delta in [0, amax] with theta + prev[b-delta] - prev[b] >= 0.
// prev is nondecreasing, so the predicate is monotone and binary search is
// exact in floating point.
std::int64_t g_threshold(std::span<const double> prev, std::int64_t b, double theta,
                         std::int64_t amax) {
  const double base = prev[b];
  auto nonneg = [&](std::int64_t d) { return (theta + prev[b - d]) - base >= 0.0; };
  std::int64_t lo = 0, hi = amax;
  while (lo < hi) {
    std::int64_t mid = lo + (hi - lo + 1) / 2;
    if (nonneg(mid)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

}  // namespace

ValueTable solve_value_table(const LandscapeModel& landscape, double theta_avg, int T,
                             std::int64_t B, const SolveOptions& opts) {
  check_landscape(landscape);
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  if (B < 0) throw std::invalid_argument("B must be >= 0");
  if (!(theta_avg >= 0.0 && theta_avg <= 1.0))
    throw std::invalid_argument("theta_avg must be in [0, 1]");

  const std::int64_t cells = static_cast<std::int64_t>(T + 1) * (B + 1);
  if (cells > opts.max_cells) {
    throw std::runtime_error(
        "value table of " + std::to_string(cells) + " cells exceeds the cap of " +
        std::to_string(opts.max_cells) +
        "; use the neural-network approximation (train-nn) at this scale");
  }

  ValueTable v;
  v.t_max = T;
  v.b_max = B;
  v.values.assign(static_cast<std::size_t>(cells), 0.0);

  const std::vector<double>& m = landscape.pdf;
  const std::int64_t delta_max = landscape.delta_max;
  const std::size_t stride = static_cast<std::size_t>(B) + 1;

  for (int t = 1; t <= T; ++t) {
    const double* prev = v.values.data() + static_cast<std::size_t>(t - 1) * stride;
    double* cur = v.values.data() + static_cast<std::size_t>(t) * stride;
    for (std::int64_t b = 0; b <= B; ++b) {
      const std::int64_t amax = std::min<std::int64_t>(delta_max, b);
      const double base = prev[b];
      double s = 0.0;
      if (opts.method == SolveMethod::kThreshold) {
        // Accumulate m(d) * g(d) while the marginal gain stays nonnegative;
        // g is nonincreasing in d, so the first violation ends the cell.
        for (std::int64_t d = 0; d <= amax; ++d) {
          const double g = (theta_avg + prev[b - d]) - base;
          if (g < 0.0) break;
          s += m[d] * g;
        }
      } else {
        // Full action enumeration: track the best prefix of the identical
        // accumulation sequence, which makes the two methods bit-identical.
        double running = 0.0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::int64_t a = 0; a <= amax; ++a) {
          const double g = (theta_avg + prev[b - a]) - base;
          running += m[a] * g;
          best = std::max(best, running);
        }
        s = best;
      }
      cur[b] = base + s;
    }
    // V(t, .) must be nondecreasing in b; rounding can undershoot by one ulp
    // in flat regions.
    for (std::int64_t b = 1; b <= B; ++b) cur[b] = std::max(cur[b], cur[b - 1]);
  }
  return v;
}

DiffTable diff_table(const ValueTable& v) {
  DiffTable d;
  d.t_max = v.t_max;
  d.b_count = v.b_max;
  d.diffs.assign(static_cast<std::size_t>(d.t_max + 1) * d.b_count, 0.0);
  for (int t = 0; t <= d.t_max; ++t) {
    auto row = v.row(t);
    double* out = d.diffs.data() + static_cast<std::size_t>(t) * d.b_count;
    for (std::int64_t b = 0; b < d.b_count; ++b) out[b] = row[b + 1] - row[b];
  }
  return d;
}

int bid_rlb(const ValueTable& v, const BidDecisionInput& input, int delta_max) {
  if (input.t == 0) throw std::invalid_argument("terminal state: t = 0");
  if (input.t < 0 || input.t > v.t_max)
    throw std::invalid_argument("t outside the solved table");
  if (input.b < 0 || input.b > v.b_max)
    throw std::invalid_argument("b outside the solved table");
  auto prev = v.row(input.t - 1);
  const std::int64_t amax = std::min<std::int64_t>(delta_max, input.b);
  return static_cast<int>(g_threshold(prev, input.b, input.theta, amax));
}

ExactValueGrids brute_force_value(const LandscapeModel& landscape,
                                  const std::vector<ThetaLevel>& theta_levels, int T,
                                  std::int64_t B, std::int64_t max_states) {
  check_landscape(landscape);
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  if (B < 0) throw std::invalid_argument("B must be >= 0");
  if (theta_levels.empty()) throw std::invalid_argument("theta_levels must be non-empty");
  double prob_sum = 0.0;
  for (const auto& level : theta_levels) {
    if (level.prob < 0 || level.theta < 0 || level.theta > 1)
      throw std::invalid_argument("bad theta level");
    prob_sum += level.prob;
  }
  if (std::abs(prob_sum - 1.0) > 1e-6)
    throw std::invalid_argument("theta probabilities must sum to 1");

  const std::size_t n_theta = theta_levels.size();
  const std::int64_t plan = static_cast<std::int64_t>(T + 1) * (B + 1) *
                            static_cast<std::int64_t>(n_theta) * (landscape.delta_max + 1);
  if (plan > max_states)
    throw std::runtime_error("brute-force plan of " + std::to_string(plan) +
                             " states exceeds the guard of " + std::to_string(max_states));

  ExactValueGrids grids;
  grids.t_max = T;
  grids.b_max = B;
  grids.n_theta = n_theta;
  grids.marginal.assign(static_cast<std::size_t>(T + 1) * (B + 1), 0.0);
  grids.per_x.assign(static_cast<std::size_t>(T + 1) * (B + 1) * n_theta, 0.0);

  const std::vector<double>& m = landscape.pdf;
  const int delta_max = landscape.delta_max;
  const std::size_t stride = static_cast<std::size_t>(B) + 1;

  for (int t = 1; t <= T; ++t) {
    const double* vm_prev = grids.marginal.data() + static_cast<std::size_t>(t - 1) * stride;
    for (std::int64_t b = 0; b <= B; ++b) {
      double marginal = 0.0;
      for (std::size_t k = 0; k < n_theta; ++k) {
        const double theta = theta_levels[k].theta;
        const std::int64_t amax = std::min<std::int64_t>(delta_max, b);
        double best = -std::numeric_limits<double>::infinity();
        for (std::int64_t a = 0; a <= amax; ++a) {
          double val = 0.0;
          for (std::int64_t d = 0; d <= a; ++d) {
            val += m[d] * (theta + vm_prev[b - d]);
          }
          double tail_mass = 0.0;
          for (int d = static_cast<int>(a) + 1; d <= delta_max; ++d) tail_mass += m[d];
          val += tail_mass * vm_prev[b];
          best = std::max(best, val);
        }
        grids.per_x[(static_cast<std::size_t>(t) * stride + b) * n_theta + k] = best;
        marginal += theta_levels[k].prob * best;
      }
      grids.marginal[static_cast<std::size_t>(t) * stride + b] = marginal;
    }
  }
  return grids;
}

namespace {

constexpr char kTableMagic[8] = {'B', 'O', 'T', 'A', 'B', 'L', 'E', '1'};

struct TableHeader {
  char magic[8];
  std::uint32_t kind = 0;  // 1 = value, 2 = diff
  std::uint32_t reserved = 0;
  std::int64_t t_max = 0;
  std::int64_t b_dim = 0;
  std::uint64_t checksum = 0;
};

void write_grid(const std::string& path, std::uint32_t kind, std::int64_t t_max,
                std::int64_t b_dim, const std::vector<double>& payload) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  TableHeader header;
  std::memcpy(header.magic, kTableMagic, sizeof(kTableMagic));
  header.kind = kind;
  header.t_max = t_max;
  header.b_dim = b_dim;
  header.checksum = fnv1a(payload.data(), payload.size() * sizeof(double));
  out.write(reinterpret_cast<const char*>(&header), sizeof(header));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

void read_grid(const std::string& path, std::uint32_t expected_kind, std::int64_t& t_max,
               std::int64_t& b_dim, std::vector<double>& payload) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open table file: " + path);
  TableHeader header;
  in.read(reinterpret_cast<char*>(&header), sizeof(header));
  if (!in || std::memcmp(header.magic, kTableMagic, sizeof(kTableMagic)) != 0)
    throw std::runtime_error(path + ": not a table file");
  if (header.kind != expected_kind) throw std::runtime_error(path + ": wrong table kind");
  if (header.t_max < 0 || header.b_dim < 0) throw std::runtime_error(path + ": bad dimensions");
  t_max = header.t_max;
  b_dim = header.b_dim;
  payload.resize(static_cast<std::size_t>(t_max + 1) * b_dim);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!in) throw std::runtime_error(path + ": truncated table file");
  if (fnv1a(payload.data(), payload.size() * sizeof(double)) != header.checksum)
    throw std::runtime_error(path + ": checksum mismatch");
}

}  // namespace

void save_value_table(const std::string& path, const ValueTable& v) {
  write_grid(path, 1, v.t_max, v.b_max + 1, v.values);
}

ValueTable load_value_table(const std::string& path) {
  ValueTable v;
  std::int64_t t_max = 0, b_dim = 0;
  read_grid(path, 1, t_max, b_dim, v.values);
  if (b_dim < 1) throw std::runtime_error(path + ": bad value-table width");
  v.t_max = static_cast<int>(t_max);
  v.b_max = b_dim - 1;
  return v;
}

void save_diff_table(const std::string& path, const DiffTable& d) {
  write_grid(path, 2, d.t_max, d.b_count, d.diffs);
}

DiffTable load_diff_table(const std::string& path) {
  DiffTable d;
  std::int64_t t_max = 0, b_dim = 0;
  read_grid(path, 2, t_max, b_dim, d.diffs);
  d.t_max = static_cast<int>(t_max);
  d.b_count = b_dim;
  return d;
}

void export_value_table_text(const std::string& path, const ValueTable& v) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out.precision(17);
  out << "value " << v.t_max << ' ' << v.b_max << '\n';
  for (int t = 0; t <= v.t_max; ++t) {
    auto row = v.row(t);
    for (std::int64_t b = 0; b <= v.b_max; ++b) {
      if (b) out << ' ';
      out << row[b];
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace bidopt
