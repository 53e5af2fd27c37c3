#include <netpot/cli.hpp>

int main(int argc, char** argv) {
  return netpot::cli::run(argc, argv);
}
