#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "foliate/parallel.hpp"

using namespace foliate::cli;

int main(int argc, char** argv) {
    CLI::App app{"foliate: geometric X-ray transform experiments under a convex foliation"};
    app.require_subcommand(1);
    std::string config_path;
    int threads = -1;
    std::vector<CLI::App*> subs;
    for (const auto& name : command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("-c,--config", config_path, "JSON configuration file");
        sub->add_option("--threads", threads, "worker cap, 0 for all cores");
        sub->allow_extras();
        sub->footer("Any configuration key can be overridden with --key=value.");
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    Config cfg = Config::for_command(chosen->get_name());
    try {
        if (!config_path.empty()) cfg.merge_file(config_path);
        for (const auto& extra : chosen->remaining()) cfg.set_override(extra);
        if (threads >= 0) cfg.set("threads", threads);
        int t = cfg.integer("threads");
        if (t < 0) throw UsageError("threads must be >= 0");
        foliate::set_max_threads(static_cast<unsigned>(t));
    } catch (const foliate::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return run_command(chosen->get_name(), cfg, std::cout, std::cerr);
}
