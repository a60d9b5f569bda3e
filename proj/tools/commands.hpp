#pragma once

#include <CLI11.hpp>

namespace palseg::cli {

// Exit-code contract: 0 success, 1 validation/domain failure, 2 usage error.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void register_unfold(CLI::App& app);
void register_dataset(CLI::App& app);
void register_train(CLI::App& app);
void register_eval(CLI::App& app);
void register_predict(CLI::App& app);
void register_bench(CLI::App& app);

} // namespace palseg::cli
