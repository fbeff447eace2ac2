#pragma once

#include <string_view>
#include <vector>

namespace photodet {

struct HomodyneRecord;

enum class FilterKind { square, matched };

FilterKind parse_filter_kind(std::string_view name);
std::string_view to_string(FilterKind kind);

/// Linear filter f(t) applied to the homodyne current over [t_begin, t_end).
/// A matched filter carries a template sampled on a uniform grid starting at
/// template_t0 with spacing template_dt, normalized to max |f| = 1.
struct FilterSpec {
  FilterKind kind = FilterKind::square;
  double t_begin = 0.0;
  double t_end = 1.0;
  double template_t0 = 0.0;
  double template_dt = 0.0;
  std::vector<double> template_values;

  static FilterSpec square(double t_begin, double t_end);
  static FilterSpec matched(double t_begin, double t_end, double t0, double dt, std::vector<double> values);

  double value(double t) const;
  double duration() const { return t_end - t_begin; }
  void validate() const;
  FilterSpec with_window(double t_begin, double t_end) const;
};

/// S = Σ_k j_k f(t_k) dt over the samples with t_k in [t_begin, t_end).
double integrate_signal(const HomodyneRecord& record, const FilterSpec& filter);

}  // namespace photodet
