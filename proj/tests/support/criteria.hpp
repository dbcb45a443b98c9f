#ifndef ADSIEVE_TESTS_CRITERIA_HPP_
#define ADSIEVE_TESTS_CRITERIA_HPP_

#include <functional>
#include <string>
#include <vector>

namespace adsieve::testing {

struct CriterionResult {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<CriterionResult()> check;
};

// Release-level checks, each a self-contained pass/fail decision.
const std::vector<Criterion>& AcceptanceCriteria();

CriterionResult CheckGoldenGraph();
CriterionResult CheckCentralityOracle();
CriterionResult CheckForestOracle();
CriterionResult CheckMetricArithmetic();
CriterionResult CheckEndToEnd();
CriterionResult CheckFilterConformance();
CriterionResult CheckObfuscationRobustness();
CriterionResult CheckDeterminism();

}  // namespace adsieve::testing

#endif  // ADSIEVE_TESTS_CRITERIA_HPP_
