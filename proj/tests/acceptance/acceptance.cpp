#include <iostream>

#include "pathheat/acceptance.hpp"
#include "pathheat/config.hpp"

int main(int argc, char** argv) {
    pathheat::AcceptanceOptions opt;
    opt.seed = pathheat::default_seed(0);
    if (argc > 1) opt.profile = argv[1];
    auto results = pathheat::run_acceptance(opt);
    bool all = true;
    std::cout << "\n";
    for (const auto& r : results) {
        std::cout << pathheat::format_result_line(r);
        all = all && r.pass;
    }
    return all ? 0 : 1;
}
