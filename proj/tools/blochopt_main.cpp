#include "blochopt/cli.hpp"

int main(int argc, char** argv) {
    return blochopt::cli::run_cli(argc, argv);
}
