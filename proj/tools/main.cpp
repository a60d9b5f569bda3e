#include <iostream>

#include "commands.hpp"
#include "palseg/common/check.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Panoramic annular scene segmentation toolkit"};
    app.require_subcommand(1);

    palseg::cli::register_unfold(app);
    palseg::cli::register_dataset(app);
    palseg::cli::register_train(app);
    palseg::cli::register_eval(app);
    palseg::cli::register_predict(app);
    palseg::cli::register_bench(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return palseg::cli::kExitUsage;
    } catch (const palseg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return palseg::cli::kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return palseg::cli::kExitFailure;
    }
    return palseg::cli::kExitOk;
}
