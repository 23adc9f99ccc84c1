#pragma once

// JSON forms of NNTS parameters, fits and test results.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "apit/apit_test.hpp"
#include "apit/errors.hpp"
#include "apit/nnts.hpp"
#include "apit/version.hpp"

namespace apit {

/// {"M": 2, "c": [[re, im], ...]}
inline nlohmann::json to_json(const NNTSParams& p) {
  nlohmann::json c = nlohmann::json::array();
  for (const Complex& ck : p.coefficients()) c.push_back({ck.real(), ck.imag()});
  return {{"M", p.degree()}, {"c", c}};
}

/// Accepts [re, im] pairs or plain reals; renormalizes tiny norm drift from
/// printed decimals but rejects vectors that are not close to unit norm.
inline NNTSParams nnts_from_json(const nlohmann::json& j) {
  try {
    std::vector<Complex> c;
    for (const auto& e : j.at("c")) {
      if (e.is_number())
        c.emplace_back(e.get<double>(), 0.0);
      else if (e.is_array() && e.size() == 2)
        c.emplace_back(e[0].get<double>(), e[1].get<double>());
      else
        throw DomainError("NNTS coefficient must be a number or a [re, im] pair");
    }
    if (c.empty()) throw DomainError("NNTS coefficient list is empty");
    if (j.contains("M") && j.at("M").get<std::size_t>() + 1 != c.size())
      throw DomainError("NNTS: M does not match the number of coefficients");
    double norm2 = 0.0;
    for (const Complex& ck : c) norm2 += std::norm(ck);
    if (std::abs(norm2 - 1.0) > 1e-6) throw DomainError("NNTS coefficients must have unit norm");
    return NNTSParams::normalized(std::move(c));
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("NNTS parameters: ") + e.what());
  }
}

inline nlohmann::json to_json(const NNTSFit& fit) {
  nlohmann::json j = {{"params", to_json(fit.params)},
                      {"log_likelihood", fit.log_likelihood},
                      {"gradient_norm", fit.gradient_norm},
                      {"iterations", fit.iterations}};
  if (fit.params.degree() >= 1) j["lambda_hat"] = lambda_c0(fit.params);
  return j;
}

inline nlohmann::json to_json(const TestResult& r, std::uint64_t seed) {
  nlohmann::json j = {{"method", std::string(method_name(r.method))},
                      {"requested_direction", std::string(to_string(r.requested))},
                      {"direction", std::string(to_string(r.direction))},
                      {"statistic", r.statistic},
                      {"p_value", r.p_value},
                      {"n", r.n},
                      {"version", std::string(kVersion)},
                      {"seed", seed}};
  j["lambda_hat"] = r.lambda_hat ? nlohmann::json(*r.lambda_hat) : nlohmann::json(nullptr);
  return j;
}

}  // namespace apit
