#pragma once

#include <stdexcept>
#include <string>

namespace pika {

struct Span {
    int line = 0;
    int col = 0;
    int end_line = 0;
    int end_col = 0;
    bool valid() const { return line > 0; }
};

// Every failure surfaced to users carries an error class and, for typing
// failures, the name of the rule whose premise did not hold.
class PikaError : public std::runtime_error {
public:
    PikaError(std::string kind, std::string rule, std::string msg, Span span = {})
        : std::runtime_error(format(kind, rule, msg, span)),
          kind_(std::move(kind)), rule_(std::move(rule)), detail_(std::move(msg)), span_(span) {}

    const std::string& kind() const { return kind_; }
    const std::string& rule() const { return rule_; }
    const std::string& detail() const { return detail_; }
    const Span& span() const { return span_; }

private:
    static std::string format(const std::string& kind, const std::string& rule,
                              const std::string& msg, const Span& s) {
        std::string out;
        if (s.valid()) out += std::to_string(s.line) + ":" + std::to_string(s.col) + ": ";
        out += kind;
        if (!rule.empty()) out += " (" + rule + ")";
        out += ": " + msg;
        return out;
    }

    std::string kind_;
    std::string rule_;
    std::string detail_;
    Span span_;
};

}  // namespace pika
