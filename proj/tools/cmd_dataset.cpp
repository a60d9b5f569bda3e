#include <iostream>

#include "commands.hpp"
#include "palseg/data/validate.hpp"

namespace palseg::cli {

void register_dataset(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("dataset", "Dataset utilities");
    cmd->require_subcommand(1);

    auto root = std::make_shared<std::string>();
    auto verbose = std::make_shared<bool>(false);
    CLI::App* validate =
        cmd->add_subcommand("validate", "Validate a dataset and emit a JSON report");
    validate->add_option("--root", *root, "Dataset root directory")->required();
    validate->add_flag("--all-samples", *verbose, "Include clean samples in the report");
    validate->callback([root, verbose]() {
        const data::DatasetManifest manifest = data::load_manifest(*root);
        const data::DatasetReport report = data::validate_dataset(manifest);
        std::cout << report.to_json_text(*verbose) << "\n";
        PALSEG_CHECK(report.ok(), "dataset validation found violations (see report)");
    });
}

} // namespace palseg::cli
