// CLI entry point; subcommands are wired up in cli.hpp so they stay testable.
#include <cstdio>

int main() {
  std::puts("rtlscan: not wired up yet");
  return 2;
}
