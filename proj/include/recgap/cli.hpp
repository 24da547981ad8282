#ifndef RECGAP_CLI_HPP_
#define RECGAP_CLI_HPP_

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace recgap {

/**
 * Entry point of the `recgap` tool. args excludes the program name.
 *
 * Exit codes: 0 on success, 1 on a runtime failure (one JSON error line on
 * err), 2 for an unknown subcommand or flag (usage on err).
 */
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses `key = value` lines; `#` starts a comment. Throws ConfigError.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

}  // namespace recgap

#endif  // RECGAP_CLI_HPP_
