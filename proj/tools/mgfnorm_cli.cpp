#include <iostream>

#include "mgfnorm/mgfnorm.hpp"

int main() {
    std::cout << "placeholder\n";
    return 0;
}
