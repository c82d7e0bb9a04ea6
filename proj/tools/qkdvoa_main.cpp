#include <clocale>

#include "qkdvoa/cli.hpp"

int main(int argc, char** argv) {
    std::setlocale(LC_NUMERIC, "C");
    return qkdvoa::cli::run_cli(argc, argv);
}
