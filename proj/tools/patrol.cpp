#include <cstdio>

int main() {
  std::puts("patrol cli placeholder");
  return 0;
}
