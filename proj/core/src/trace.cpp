#include "wcdrs/trace.hpp"

#include <cstdio>
#include <ostream>
#include <string>

#include "wcdrs/error.hpp"

namespace wcdrs {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Trace::Trace(int stride) : stride_(stride) {
  if (stride < 1) throw Error("trace stride must be positive");
}

void Trace::append(const TraceRow& row) {
  if (row.iter % stride_ == 0 || rows_.empty()) rows_.push_back(row);
}

void Trace::append_final(const TraceRow& row) {
  if (rows_.empty() || rows_.back().iter != row.iter) rows_.push_back(row);
}

void Trace::write_csv(std::ostream& out) const {
  out << "iter,dre,objective,norm_u_minus_v,norm_s_step,residual\n";
  for (const auto& r : rows_) {
    out << r.iter << ',' << format_double(r.dre) << ','
        << format_double(r.objective) << ',' << format_double(r.norm_u_minus_v)
        << ',' << format_double(r.norm_s_step) << ','
        << format_double(r.residual) << '\n';
  }
}

}  // namespace wcdrs
