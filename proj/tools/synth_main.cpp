// Generates the self-contained synthetic two-class dataset (images plus
// manifest), mainly for smoke-testing the pipeline without external data.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "facehop/errors.hpp"
#include "facehop/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"write a synthetic two-class face-like dataset"};
    std::string out = "synthetic";
    int count = 400;
    std::uint64_t seed = 42;
    app.add_option("--out", out, "output directory");
    app.add_option("--count", count, "number of images");
    app.add_option("--seed", seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const auto manifest = facehop::write_synthetic_dataset(out, count, seed);
        std::cout << "wrote " << count << " images, manifest at " << manifest.string() << "\n";
    } catch (const facehop::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
