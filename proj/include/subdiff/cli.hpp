#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace subdiff {

// bad configuration: unknown key, wrong type, violated precondition
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// fully resolved key=value configuration (defaults filled, numbers normalized)
struct RunConfig {
    std::map<std::string, std::string> kv;

    const std::string& subcommand() const { return kv.at("subcommand"); }
    bool has(const std::string& key) const;
    const std::string& str(const std::string& key) const;
    double num(const std::string& key) const;
    std::size_t count(const std::string& key) const;  // nonnegative integer
    bool flag(const std::string& key) const;
    std::vector<double> list(const std::string& key) const;  // empty value -> empty list

    // sorted key=value lines; the output directory is left out so the text (and its digest)
    // depends only on what is computed
    std::string resolved_text() const;
    std::string digest() const;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

// key=value lines, '#' comments, [section] headers (cosmetic, except [tol] which prefixes
// keys with "tol."). Overrides win over the text. Throws UsageError.
RunConfig parse_config(const std::string& text, const Overrides& overrides = {});
RunConfig load_config(const std::optional<std::string>& path, const Overrides& overrides = {});

// split "key=value"; throws UsageError
std::pair<std::string, std::string> split_assignment(const std::string& s);

// runs the subcommand into <out>/<digest>/. Exit codes: 0 all metrics pass, 1 a metric failed,
// 2 usage error, 3 internal failure. A one-line JSON summary goes to err on nonzero exit.
int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// the directory dispatch writes into
std::string run_directory(const RunConfig& cfg);

}  // namespace subdiff
