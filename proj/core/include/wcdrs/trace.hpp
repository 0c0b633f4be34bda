#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace wcdrs {

struct TraceRow {
  int iter = 0;
  double dre = 0.0;
  /// phi1(u) + phi2(v).
  double objective = 0.0;
  double norm_u_minus_v = 0.0;
  /// |s^{k+1} - s^k|.
  double norm_s_step = 0.0;
  double residual = 0.0;
};

/// Append-only per-iteration record. With stride k > 1 only every k-th
/// iteration (and always the first) is kept.
class Trace {
 public:
  explicit Trace(int stride = 1);

  void append(const TraceRow& row);
  /// Records `row` even when the stride would skip it (used for the final
  /// iterate of a run).
  void append_final(const TraceRow& row);

  const std::vector<TraceRow>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  int stride() const noexcept { return stride_; }

  /// Columns: iter,dre,objective,norm_u_minus_v,norm_s_step,residual; floats
  /// with 17 significant digits.
  void write_csv(std::ostream& out) const;

 private:
  int stride_;
  std::vector<TraceRow> rows_;
};

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double value);

}  // namespace wcdrs
