// Prints the logits of a freshly initialized model as hex floats, one per line.
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "sevlm/model.hpp"

int main(int argc, char** argv) {
    const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 0;
    sevlm::TransformerLM model({20, 16, 2, 2, 24, 8, seed});
    const std::vector<sevlm::TokenId> ids{1, 7, 3, 19, 0, 5, 2, 11};
    for (double v : model.logits(ids).data()) {
        std::printf("%a\n", v);
    }
}
