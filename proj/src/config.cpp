#include "pax/config.hpp"

#include <cmath>
#include <string>

#include "pax/error.hpp"

namespace pax {

void TrainingConfig::validate() const {
    if (!(epsilon_global > 0.0) || epsilon_global > 1.0) {
        throw ConfigError("epsilon_global must lie in (0,1], got " + std::to_string(epsilon_global));
    }
    if (max_rounds < 0) throw ConfigError("max_rounds must be >= 0");
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (gamma < 0.0) throw ConfigError("gamma must be >= 0");
    if (!(learning_rate > 0.0) || learning_rate > 1.0) {
        throw ConfigError("learning_rate must lie in (0,1]");
    }
    if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
    if (early_stop && early_stop_patience < 1) throw ConfigError("early_stop_patience must be >= 1");
}

int bins_for_epsilon(double eps) {
    if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");
    const double b = std::floor(1.0 / eps);
    if (b < 1.0) return 1;
    if (b > 1e9) throw ConfigError("epsilon " + std::to_string(eps) + " implies an unreasonable bin count");
    return static_cast<int>(b);
}

double epsilon_for_bins(int bins) {
    if (bins < 1) throw ConfigError("bin count must be >= 1");
    return 1.0 / static_cast<double>(bins);
}

}  // namespace pax
