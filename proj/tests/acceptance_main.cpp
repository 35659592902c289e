// Acceptance suite: one pass/fail line per criterion. Full implementation
// lands after the unit suites; this placeholder keeps the target building.
#include <cstdio>
int main() {
  std::printf("acceptance suite not yet implemented\n");
  return 1;
}
