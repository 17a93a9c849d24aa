#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace shiftconv::cli {

inline constexpr int kSchemaVersion = 1;

enum class Format { csv, json };

struct RunConfig {
  std::string command;
  std::map<std::string, std::string> params;  // option name -> text, defaults filled in
  std::map<std::string, double> tolerances;   // defaults filled in
  std::optional<std::string> output_path;     // stdout when unset
  Format format = Format::json;
  unsigned threads = 1;
};

struct ParamSpec {
  std::string name;
  std::string default_value;  // empty: optional, unset
  std::string help;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
  std::vector<std::pair<std::string, double>> tolerances;
  Format default_format = Format::json;
};

const std::vector<CommandSpec>& commands();
const CommandSpec& command_spec(const std::string& name);

// Reads key=value lines ('#' comments, blank lines ignored).
std::map<std::string, std::string> read_config_file(const std::string& path);

// Parses argv into a validated config; throws shiftconv::InvalidArgument on
// unknown keys or malformed values, and CLI::ParseError for flag errors.
RunConfig parse_command_line(int argc, const char* const* argv);

// Executes the command and writes the artifact. Returns 0 on success, 1 on
// invalid input, 2 when a result could not be certified to tolerance.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// parse_command_line + run with exit-code mapping.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shiftconv::cli
