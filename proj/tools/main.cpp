#include "cli_app.hpp"

int main(int argc, char** argv) {
    return fmlab::cli::run_main(argc, argv);
}
