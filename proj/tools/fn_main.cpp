#include <csignal>
#include <iostream>

#include "fn/cli.hpp"

namespace {

extern "C" void on_signal(int) { fn::cli::request_shutdown(); }

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::signal(SIGPIPE, SIG_IGN);
    return fn::cli::run({argv, argv + argc}, fn::cli::environment(), std::cout, std::cerr);
}
