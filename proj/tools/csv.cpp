#include "csv.hpp"

#include <cstdio>

namespace smcf::cli {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void append_field(std::string& out, const std::optional<double>& v) {
  out.push_back(',');
  if (v) out += format_value(*v);
}

void append_field(std::string& out, const std::optional<int>& v) {
  out.push_back(',');
  if (v) out += std::to_string(*v);
}

}  // namespace

std::string to_csv(std::span<const ResultRecord> records) {
  std::string out{kCsvHeader};
  out.push_back('\n');
  for (const ResultRecord& r : records) {
    out += r.experiment;
    append_field(out, r.epsilon);
    append_field(out, r.g0);
    append_field(out, r.g1);
    append_field(out, r.n_particles);
    append_field(out, r.k);
    append_field(out, r.q);
    append_field(out, r.p_norm);
    out.push_back(',');
    if (r.scheme) out += scheme_name(*r.scheme);
    out.push_back(',');
    if (r.replicates) out += std::to_string(*r.replicates);
    out.push_back(',');
    if (r.seed) out += std::to_string(*r.seed);
    out.push_back(',');
    out += format_value(r.value);
    append_field(out, r.std_error);
    append_field(out, r.bound);
    out.push_back('\n');
  }
  return out;
}

}  // namespace smcf::cli
