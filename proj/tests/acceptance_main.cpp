#include <iostream>

#include "coalweb/acceptance.hpp"

int main() {
    coalweb::AcceptanceOptions opt;
    return coalweb::acceptance_main("all", opt, std::cout);
}
