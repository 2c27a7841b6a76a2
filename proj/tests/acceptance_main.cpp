#include <iostream>

#include "nvgrad/acceptance.hpp"

int main() {
  int failed = 0;
  nvgrad::acceptance::run_all([&](const nvgrad::acceptance::Result& r) {
    std::cout << nvgrad::acceptance::format(r) << std::endl;
    if (!r.pass) ++failed;
  });
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
