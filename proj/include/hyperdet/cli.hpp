#pragma once

#include "hyperdet/config.hpp"

namespace hyperdet {

/// Full command-line entry point: parses flags and the subcommand, loads the
/// run configuration, dispatches the stage, and maps exceptions to exit codes
/// (0 success, 1 data/training error, 2 config error).
int run_cli(int argc, const char* const* argv);

// Stage entry points, also used directly by the tests. Each reads its
// declared inputs and writes its declared artifacts atomically.
void stage_synth(const RunConfig& cfg);
void stage_preprocess(const RunConfig& cfg);
void stage_features(const RunConfig& cfg);
void stage_split(const RunConfig& cfg);
void stage_train(const RunConfig& cfg);
void stage_evaluate(const RunConfig& cfg);
void stage_compare(const RunConfig& cfg);
void stage_explain(const RunConfig& cfg);
void stage_pipeline(const RunConfig& cfg);

}  // namespace hyperdet
