#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace angiosim {

/// Per-image scalar thickness estimates, in pixels.
struct ThicknessSamples {
    std::vector<double> values;
    std::string source_tag;

    std::size_t count() const { return values.size(); }
    bool empty() const { return values.empty(); }
};

}  // namespace angiosim
