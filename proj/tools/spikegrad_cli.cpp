#include "spikegrad/cli.hpp"

int main(int argc, char** argv) {
    return spikegrad::run_cli(argc, argv);
}
