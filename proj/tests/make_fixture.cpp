// Writes the noiseless fit fixture: x.csv (20 x 4) and y.dten (20 x 3 x 3)
// with Y = W x_0 X for W of multilinear rank (2, 2, 2).

#include "tensorreg/datagen.hpp"
#include "tensorreg/rng.hpp"
#include "tensorreg/tensor_io.hpp"

#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
    using namespace tensorreg;
    if (argc != 2) {
        std::cerr << "usage: make_fixture <output-dir>\n";
        return 2;
    }
    const std::filesystem::path dir = argv[1];
    std::filesystem::create_directories(dir);
    const DenseTensor w = random_lowrank_tensor({4, 3, 3}, {2, 2, 2}, 2024);
    Rng rng(2024, "X");
    const Eigen::MatrixXd x = rng.normal_matrix(20, 4);
    save_csv(dir / "x.csv", x);
    save_dten(dir / "y.dten", mode_product(w, x, 0));
    std::cout << "wrote " << (dir / "x.csv").string() << " and " << (dir / "y.dten").string() << '\n';
    return 0;
}
