#include <iostream>

int main() {
  std::cout << "mvnkit placeholder\n";
  return 0;
}
