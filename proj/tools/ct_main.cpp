#include <cstdio>

int main() {
  std::puts("ct: scenario runner (under construction)");
  return 2;
}
