#pragma once

#include "dqvi/contact2d.hpp"
#include "dqvi/stepper.hpp"

#include <optional>
#include <string>

namespace dqvi {

/// Parsed run configuration. The config text is JSON with strict key
/// checking: any unknown key is a fatal parse error.
struct RunConfig {
    std::string source;                      // builtin name, or "contact"
    bool is_contact = false;
    std::optional<contact2d::ContactModel> contact;
    TimeGrid grid{1.0, 16};
    StepperConfig stepper;
    std::string output_dir = "out";
    unsigned long long seed = 0;
    int verbosity = 0;
};

/// Parses config text; relative mesh paths resolve against base_dir.
/// Throws ParseError with line/column diagnostics on malformed JSON and on
/// unknown or ill-typed keys.
RunConfig parse_config_text(const std::string& text, const std::string& base_dir);

RunConfig load_config(const std::string& path);

} // namespace dqvi
