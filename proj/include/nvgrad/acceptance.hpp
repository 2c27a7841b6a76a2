#pragma once

#include <functional>
#include <string>
#include <vector>

namespace nvgrad::acceptance {

struct Result {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;  // measured numbers
  double seconds = 0.0;
  double budget = 0.0;  // allowed runtime, s
};

Result closed_form_vs_quadrature();  // 1
Result field_solver_cross_check();   // 2
Result psf_headline_numbers();       // 3
Result resolution_map_structure();   // 4
Result striped_domain_period();      // 5
Result amplitude_round_trip();       // 6
Result delay_sweep_round_trip();     // 7
Result hamiltonian_consistency();    // 8

/// Runs criteria 1-8 in order; `on_result` sees each one as it finishes.
std::vector<Result> run_all(const std::function<void(const Result&)>& on_result = {});

/// "PASS  3  title: detail (1.23 s / 10 s)"
std::string format(const Result& r);

}  // namespace nvgrad::acceptance
