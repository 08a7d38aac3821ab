// Regenerates the scenario JSON files under fixtures/ from the built-in
// fixture definitions, so the files on disk never drift from the code.

#include <fstream>
#include <iostream>

#include "kge/kge.hpp"
#include "kge/scenario_io.hpp"

int main(int argc, char** argv) {
    const std::string dir = argc > 1 ? argv[1] : "fixtures";
    for (const std::string name :
         {"discrimination-2x2", "tmaze", "cue-conditional"}) {
        const kge::Scenario s = kge::fixture(name);
        const std::string path = dir + "/" + name + ".json";
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            std::cerr << "cannot write " << path << "\n";
            return 1;
        }
        out << kge::scenario_to_json(s).dump(2) << "\n";
        std::cout << "wrote " << path << "\n";
    }
    return 0;
}
