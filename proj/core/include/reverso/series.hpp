#pragma once

#include <string>
#include <vector>

namespace reverso {

// A univariate time series. Missing values are NaN. `source` tags the
// generator or dataset of origin; `freq` is an optional frequency tag
// (e.g. "H", "D", "W").
struct Series {
    std::string id;
    std::string source;
    std::string freq;
    std::vector<double> values;
};

}  // namespace reverso
