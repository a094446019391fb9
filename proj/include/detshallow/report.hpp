#pragma once

#include <sstream>
#include <string>

#include <json.hpp>

#include "detshallow/pipeline.hpp"

namespace detshallow {

inline nlohmann::json complex_json(const FloatComplex& z) {
  return {{"re", z.re.to_double()}, {"im", z.im.to_double()}, {"re_digits", z.re.to_string(40)},
          {"im_digits", z.im.to_string(40)}};
}
inline nlohmann::json complex_json(const ExactComplex& z) {
  return {{"re", z.re.get_d()}, {"im", z.im.get_d()}, {"re_exact", z.re.get_str()}, {"im_exact", z.im.get_str()}};
}

// Everything except wall time is a deterministic function of the inputs.
inline nlohmann::json report_json(const ApproxResult& r, bool include_time = true) {
  nlohmann::json j;
  j["estimate"] = complex_json(r.estimate);
  j["log_estimate"] = r.log_estimate ? complex_json(*r.log_estimate) : nlohmann::json();
  j["oracle"] = r.oracle ? complex_json(*r.oracle) : nlohmann::json();
  j["rel_error"] = r.rel_error ? nlohmann::json(*r.rel_error) : nlohmann::json();
  j["k"] = r.k.get_str();
  j["t"] = r.t;
  j["theta"] = r.theta;
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& m : r.m_sequence) ms.push_back(m.get_str());
  j["m_sequence"] = ms;
  j["r"] = r.r;
  j["algorithm_r"] = r.algorithm_r.get_str();
  j["algorithm_M"] = r.algorithm_M.get_str();
  j["precision_bits"] = r.precision_bits;
  if (r.circuit) {
    const auto& c = *r.circuit;
    j["circuit"] = {{"size_pre", c.size_pre},
                    {"size_post", c.size_post},
                    {"depth_pre", c.depth_pre},
                    {"depth_post", c.depth_post},
                    {"mult_depth_pre", c.mult_depth_pre},
                    {"mult_depth_post", c.mult_depth_post},
                    {"degree", c.degree},
                    {"reduced", c.reduced}};
  } else {
    j["circuit"] = nullptr;
  }
  if (r.bitwidth) {
    const auto& b = *r.bitwidth;
    j["bitwidth"] = {{"max", b.max_bits},
                     {"bound", b.bound.get_str()},
                     {"per_level_max", b.level_max_bits},
                     {"magnitude_violations", b.magnitude_violations},
                     {"margin", b.worst_magnitude_margin}};
  } else {
    j["bitwidth"] = nullptr;
  }
  j["schedule"] = {{"certified_ratios", r.certified_ratios}, {"min_ratio", r.min_certified_ratio}};
  j["exact_fallback"] = r.exact_fallback;
  if (r.abs_details) j["abs"] = {{"v", r.abs_details->v}, {"iterations", r.abs_details->iterations}};
  if (include_time) j["wall_time_ms"] = r.wall_time_ms;
  return j;
}

inline std::string report_text(const ApproxResult& r) {
  std::ostringstream os;
  os << "estimate      " << r.estimate.re.to_string(20) << " + " << r.estimate.im.to_string(6) << "i\n";
  if (r.log_estimate) os << "log estimate  " << r.log_estimate->re.to_string(20) << '\n';
  if (r.oracle) os << "oracle        " << r.oracle->re.get_d() << '\n';
  if (r.rel_error) os << "rel error     " << *r.rel_error << '\n';
  os << "k             " << r.k.get_str() << '\n';
  os << "t             " << r.t << '\n';
  os << "precision     " << r.precision_bits << " bits\n";
  os << "fallback      " << (r.exact_fallback ? "exact" : "no") << '\n';
  if (r.circuit)
    os << "circuit       size " << r.circuit->size_pre << " -> " << r.circuit->size_post << ", depth "
       << r.circuit->depth_pre << " -> " << r.circuit->depth_post << '\n';
  return os.str();
}

}  // namespace detshallow
