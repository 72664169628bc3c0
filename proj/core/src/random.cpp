#include "rmdyn/random.hpp"

namespace rmdyn {

Stream make_stream(std::uint64_t master_seed, std::uint64_t trial_index) {
    return Stream(derive_seed(master_seed, trial_index));
}

}  // namespace rmdyn
