#pragma once

#include <cstdint>
#include <vector>

namespace neuroplan {

struct TrainOptions {
    int epochs = 200;
    int batch_size = 128;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    // stop once the epoch loss has improved by less than min_rel_improve
    // relative to the best seen, for `patience` consecutive epochs
    double min_rel_improve = 1e-3;
    int patience = 20;
    bool verbose = false;
};

struct TrainReport {
    std::vector<double> loss_curve; // mean minibatch loss per epoch
    double learning_rate = 0.0;
    double lambda = 0.0; // CAE regularization echo; 0 when not applicable
    int epochs_run = 0;
};

} // namespace neuroplan
