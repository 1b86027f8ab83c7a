#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace foliate::cli {

enum ExitCode { kPass = 0, kFail = 1, kUsage = 2 };

const std::vector<std::string>& command_names();

// Each command writes its files under cfg "out" and a short summary to `log`.
int cmd_forward(const Config& cfg, std::ostream& log);
int cmd_normal_op(const Config& cfg, std::ostream& log);
int cmd_symbol_check(const Config& cfg, std::ostream& log);
int cmd_reconstruct(const Config& cfg, std::ostream& log);
int cmd_layer_strip(const Config& cfg, std::ostream& log);
int cmd_stability(const Config& cfg, std::ostream& log);
int cmd_probe(const Config& cfg, std::ostream& log);

// Dispatch by name; library errors become exit codes with a message on `err`.
int run_command(const std::string& name, const Config& cfg, std::ostream& log, std::ostream& err);

}  // namespace foliate::cli
