/**
 * @file selftest.hpp
 * @brief Built-in verification suite: finite-difference oracles for the
 *        Jacobian, O-FIM and KKT gradient, plus the structural invariants.
 */
#pragma once

#include <string>
#include <vector>

namespace fdd {

struct CheckResult {
  std::string name;
  bool passed = false;
  double max_error = 0.0;
};

struct SelfTestOptions {
  std::uint64_t seed = 42;
  // test fixture: flips the sign of one Jacobian row inside the Jacobian
  // check, which must then fail while every other check stays green
  bool inject_jacobian_sign_error = false;
};

std::vector<CheckResult> run_selftest(const SelfTestOptions& opt = {});

}  // namespace fdd
