// SPDX-License-Identifier: Apache-2.0
#include "rulegen/rule.hpp"

namespace rulegen::rules {

const char* to_string(RuleFormat f) {
    return f == RuleFormat::yara ? "yara" : "semgrep";
}

const char* to_string(ErrCode c) {
    switch (c) {
        case ErrCode::missing_section: return "missing_section";
        case ErrCode::syntax: return "syntax";
        case ErrCode::undefined_string: return "undefined_string";
        case ErrCode::bad_regex: return "bad_regex";
        case ErrCode::bad_meta: return "bad_meta";
        case ErrCode::encoding: return "encoding";
        case ErrCode::yaml_structure: return "yaml_structure";
    }
    return "unknown";
}

CompileError make_error(ErrCode code, const std::string& detail) {
    // prefix wording mirrors the six fix-prompt instructions; do not reword
    switch (code) {
        case ErrCode::missing_section:
            return {code, "missing or incomplete parts: " + detail};
        case ErrCode::syntax:
            return {code, "syntax error: " + detail};
        case ErrCode::undefined_string:
            return {code, "undefined string in condition: " + detail};
        case ErrCode::bad_regex:
            return {code, "regular expression issue: " + detail};
        case ErrCode::bad_meta:
            return {code, "invalid meta field value: " + detail};
        case ErrCode::encoding:
            return {code, "file encoding issue: " + detail};
        case ErrCode::yaml_structure:
            return {code, "yaml structure error: " + detail};
    }
    return {code, detail};
}

}  // namespace rulegen::rules
