#include "photodet/detection.hpp"

#include "photodet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace photodet {

FilterKind parse_filter_kind(std::string_view name) {
  if (name == "square") return FilterKind::square;
  if (name == "matched") return FilterKind::matched;
  throw std::invalid_argument("unknown filter kind '" + std::string(name) + "'");
}

std::string_view to_string(FilterKind kind) { return kind == FilterKind::square ? "square" : "matched"; }

FilterSpec FilterSpec::square(double t_begin, double t_end) {
  FilterSpec f;
  f.kind = FilterKind::square;
  f.t_begin = t_begin;
  f.t_end = t_end;
  f.validate();
  return f;
}

FilterSpec FilterSpec::matched(double t_begin, double t_end, double t0, double dt, std::vector<double> values) {
  FilterSpec f;
  f.kind = FilterKind::matched;
  f.t_begin = t_begin;
  f.t_end = t_end;
  f.template_t0 = t0;
  f.template_dt = dt;
  f.template_values = std::move(values);
  f.validate();
  return f;
}

double FilterSpec::value(double t) const {
  if (t < t_begin || t >= t_end) return 0.0;
  if (kind == FilterKind::square) return 1.0;
  const double x = (t - template_t0) / template_dt;
  if (x < -1e-9 || x > static_cast<double>(template_values.size() - 1) + 1e-9) return 0.0;
  const auto last = template_values.size() - 1;
  const double xc = std::clamp(x, 0.0, static_cast<double>(last));
  const auto i = std::min(static_cast<std::size_t>(xc), last);
  if (i == last) return template_values[last];
  const double w = xc - static_cast<double>(i);
  return (1.0 - w) * template_values[i] + w * template_values[i + 1];
}

void FilterSpec::validate() const {
  if (!(t_end > t_begin)) throw std::invalid_argument("filter window needs t_end > t_begin");
  if (kind == FilterKind::square) return;
  if (template_values.size() < 2 || !(template_dt > 0.0)) {
    throw std::invalid_argument("matched filter needs at least two template samples and a positive spacing");
  }
  double peak = 0.0;
  for (double v : template_values) {
    if (!std::isfinite(v)) throw std::invalid_argument("matched filter template is not finite");
    peak = std::max(peak, std::abs(v));
  }
  if (std::abs(peak - 1.0) > 1e-9) throw std::invalid_argument("matched filter template must have peak |f| = 1");
}

FilterSpec FilterSpec::with_window(double begin, double end) const {
  FilterSpec f = *this;
  f.t_begin = begin;
  f.t_end = end;
  f.validate();
  return f;
}

double integrate_signal(const HomodyneRecord& record, const FilterSpec& filter) {
  constexpr double eps = 1e-9;
  if (filter.t_begin < record.t0 - eps || filter.t_end > record.t_end() + eps) {
    throw std::invalid_argument("filter window lies outside the recorded interval");
  }
  const auto n = record.current.size();
  const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil((filter.t_begin - record.t0) / record.dt - eps)));
  const auto stop = std::min(n, static_cast<std::size_t>(std::ceil((filter.t_end - record.t0) / record.dt - eps)));
  double s = 0.0;
  if (filter.kind == FilterKind::square) {
    for (std::size_t k = first; k < stop; ++k) s += record.current[k];
  } else {
    for (std::size_t k = first; k < stop; ++k) s += record.current[k] * filter.value(record.time(k));
  }
  return s * record.dt;
}

void Priors::validate() const {
  if (p0 < 0.0 || p1 < 0.0 || std::abs(p0 + p1 - 1.0) > 1e-12) {
    throw std::invalid_argument("priors must be non-negative and sum to 1");
  }
}

namespace {

void require_samples(std::span<const double> s, std::size_t at_least, const char* name) {
  if (s.size() < at_least) {
    throw std::invalid_argument(std::string(name) + " needs at least " + std::to_string(at_least) + " samples");
  }
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments(std::span<const double> s) {
  Moments m;
  for (double v : s) m.mean += v;
  m.mean /= static_cast<double>(s.size());
  for (double v : s) m.variance += (v - m.mean) * (v - m.mean);
  m.variance /= static_cast<double>(s.size() - 1);
  return m;
}

double snr_from(const Moments& a, const Moments& b) {
  const double v = a.variance + b.variance;
  if (v <= 0.0) return 0.0;
  return (b.mean - a.mean) / std::sqrt(v);
}

}  // namespace

double snr_plugin(std::span<const double> s0, std::span<const double> s1) {
  require_samples(s0, 2, "snr (n = 0)");
  require_samples(s1, 2, "snr (n = 1)");
  return snr_from(moments(s0), moments(s1));
}

SnrEstimate snr_empirical(std::span<const double> s0, std::span<const double> s1, int resamples,
                          std::uint64_t seed) {
  SnrEstimate out;
  out.snr = snr_plugin(s0, s1);
  if (resamples < 2) return out;

  GaussianStream stream(seed);
  auto draw = [&stream](std::span<const double> s, std::vector<double>& into) {
    into.resize(s.size());
    for (auto& v : into) {
      auto i = static_cast<std::size_t>(stream.uniform() * static_cast<double>(s.size()));
      v = s[std::min(i, s.size() - 1)];
    }
  };
  std::vector<double> b0, b1;
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < resamples; ++r) {
    draw(s0, b0);
    draw(s1, b1);
    const double x = snr_from(moments(b0), moments(b1));
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / resamples;
  out.stderr_ = std::sqrt(std::max(0.0, (sum2 - resamples * mean * mean) / (resamples - 1)));
  return out;
}

double fidelity(std::span<const double> s0, std::span<const double> s1, double s0t, double s1t,
                const Priors& priors) {
  require_samples(s0, 1, "fidelity (n = 0)");
  require_samples(s1, 1, "fidelity (n = 1)");
  priors.validate();
  if (s0t > s1t) throw std::invalid_argument("thresholds must satisfy S0T <= S1T");
  const auto below = std::count_if(s0.begin(), s0.end(), [&](double v) { return v <= s0t; });
  const auto above = std::count_if(s1.begin(), s1.end(), [&](double v) { return v >= s1t; });
  return priors.p0 * static_cast<double>(below) / static_cast<double>(s0.size()) +
         priors.p1 * static_cast<double>(above) / static_cast<double>(s1.size());
}

ThresholdChoice optimize_threshold(std::span<const double> s0, std::span<const double> s1, const Priors& priors) {
  require_samples(s0, 1, "threshold (n = 0)");
  require_samples(s1, 1, "threshold (n = 1)");
  priors.validate();

  std::vector<double> a(s0.begin(), s0.end());
  std::vector<double> b(s1.begin(), s1.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> pooled;
  pooled.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(pooled));
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  std::vector<double> cuts;
  cuts.reserve(pooled.size() + 1);
  const double spread = std::max(1.0, pooled.back() - pooled.front());
  cuts.push_back(pooled.front() - spread);
  for (std::size_t i = 0; i + 1 < pooled.size(); ++i) cuts.push_back(0.5 * (pooled[i] + pooled[i + 1]));
  cuts.push_back(pooled.back() + spread);

  ThresholdChoice best{cuts.front(), cuts.front(), -1.0};
  const double n0 = static_cast<double>(a.size());
  const double n1 = static_cast<double>(b.size());
  for (double c : cuts) {
    const auto below0 = std::upper_bound(a.begin(), a.end(), c) - a.begin();
    const auto below1 = std::lower_bound(b.begin(), b.end(), c) - b.begin();
    const double f = priors.p0 * static_cast<double>(below0) / n0 +
                     priors.p1 * (n1 - static_cast<double>(below1)) / n1;
    if (f > best.fidelity) best = {c, c, f};
  }
  return best;
}

FilterSpec matched_filter_template(const DetectorSetup& setup, double t_begin, double t_end) {
  const auto one = expected_current(setup, 1);
  const auto zero = expected_current(setup, 0);
  std::vector<double> values(one.size());
  double peak = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = one[k] - zero[k];
    peak = std::max(peak, std::abs(values[k]));
  }
  if (!(peak > 1e-12)) throw std::invalid_argument("matched filter template is zero: the photon produces no signal");
  for (auto& v : values) v /= peak;
  return FilterSpec::matched(t_begin, t_end, setup.grid.t0, setup.grid.dt, std::move(values));
}

namespace {

bool better(const WindowChoice& c, const WindowChoice& best) {
  constexpr double tie = 1e-12;
  if (c.score > best.score + tie) return true;
  if (c.score < best.score - tie) return false;
  const double dc = c.t_end - c.t_begin;
  const double db = best.t_end - best.t_begin;
  if (dc < db - 1e-12) return true;
  if (dc > db + 1e-12) return false;
  return c.t_begin < best.t_begin;
}

}  // namespace

WindowChoice optimize_window(std::span<const double> begins, std::span<const double> ends,
                             const std::function<double(double, double)>& score) {
  bool found = false;
  WindowChoice best;
  for (double b : begins) {
    for (double e : ends) {
      if (!(e > b)) continue;
      const WindowChoice c{b, e, score(b, e)};
      if (!found || better(c, best)) {
        best = c;
        found = true;
      }
    }
  }
  if (!found) throw std::invalid_argument("no candidate window with t_end > t_begin");
  return best;
}

WindowChoice optimize_window(const DetectorSetup& setup, const FilterSpec& shape, std::span<const double> begins,
                             std::span<const double> ends) {
  bool found = false;
  WindowChoice best;
  const double last_end = *std::max_element(ends.begin(), ends.end());
  for (double b : begins) {
    if (!(last_end > b)) continue;
    const SnrCurve curve = snr_curve(setup, b, last_end, shape);
    for (double e : ends) {
      if (!(e > b)) continue;
      const double k = std::round((e - b) / setup.grid.dt) - 1.0;
      if (k < 0 || k >= static_cast<double>(curve.snr.size()) ||
          std::abs(curve.t_end[static_cast<std::size_t>(k)] - e) > 1e-6) {
        throw std::invalid_argument("candidate window end is not on the time grid");
      }
      const WindowChoice c{b, e, curve.snr[static_cast<std::size_t>(k)]};
      if (!found || better(c, best)) {
        best = c;
        found = true;
      }
    }
  }
  if (!found) throw std::invalid_argument("no candidate window with t_end > t_begin");
  return best;
}

std::vector<double> candidate_times(double first, double last, double step) {
  if (!(step > 0.0) || last < first) throw std::invalid_argument("candidate times need step > 0 and last >= first");
  const auto n = static_cast<long>(std::floor((last - first) / step + 1e-9));
  std::vector<double> out;
  out.reserve(n + 1);
  for (long i = 0; i <= n; ++i) out.push_back(first + static_cast<double>(i) * step);
  return out;
}

DetectionSummary summarize(std::vector<double> s0, std::vector<double> s1, const Priors& priors,
                           std::string config_digest) {
  DetectionSummary out;
  out.snr = snr_empirical(s0, s1);
  out.thresholds = optimize_threshold(s0, s1, priors);
  out.s0 = std::move(s0);
  out.s1 = std::move(s1);
  out.config_digest = std::move(config_digest);
  return out;
}

}  // namespace photodet
