// Acceptance suite: one pass/fail line per criterion. Placeholder, filled
// in alongside the full surrogate experiments.
#include <cstdio>

int main() {
  std::printf("acceptance: pending\n");
  return 1;
}
