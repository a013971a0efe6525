#include <iostream>
#include <string>
#include <vector>

#include "sparsedom/cli.hpp"

namespace {

void print_usage(std::ostream& os) {
    os << "usage: sparsedom SUBCOMMAND [--key value]... [--config FILE] [--deterministic]\n"
          "subcommands:\n"
          "  sparse-build    build a stopping family adaptively and dump it\n"
          "  dominate-check  build a family and verify the domination constant\n"
          "  sharpness       chain blow-up curve C*(n) and fitted slope\n"
          "  weights-scan    weighted operator-norm scaling across a weight family\n"
          "  cz-check        decomposition bounds over a seeded corpus\n"
          "  convexity       q-convexity lower bound by sampling\n"
          "  probe-norm      operator norm lower bound with witness\n"
          "Exit codes: 0 ok, 1 verification failure, 2 config error.\n";
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args[0] == "--help" || args[0] == "help") {
        print_usage(args.empty() ? std::cerr : std::cout);
        return args.empty() ? 2 : 0;
    }
    return sparsedom::run_command_line(args, std::cout, std::cerr);
}
