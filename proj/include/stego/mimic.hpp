#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "stego/bitstream.hpp"
#include "stego/bytes.hpp"
#include "stego/error.hpp"
#include "stego/payload.hpp"

// Grammar-based text steganography ("spam mimic"). A context-free grammar in
// the spam register drives derivations; at every production with m >= 2
// alternatives, payload bits select the alternative through a canonical
// prefix code. Decoding replays the derivation with an LL(1) parse and emits
// the codeword of each observed choice.
//
// Grammar file format (UTF-8):
//   # comment lines
//   @attach . ! ;        tokens rendered glued to the previous token
//   @newline . !         a newline instead of a space after these tokens
//   name:
//   | token token <other-production> token
//   |                    (an empty alternative derives nothing)
//
// Tokens are whitespace-separated; <angle-brackets> reference productions;
// the first production is the start symbol. Payload bits are exhausted by
// concatenating derivations of the start symbol; zero padding then selects
// alternative 0 everywhere until the text closes grammatically.

namespace stego {

struct GrammarSymbol {
    bool is_terminal = true;
    std::string text;    // terminal text, or the referenced production name
    int production = -1; // resolved index for nonterminals, -1 if undefined
};

struct GrammarAlternative {
    std::vector<GrammarSymbol> symbols; // empty = epsilon
};

struct GrammarProduction {
    std::string name;
    std::vector<GrammarAlternative> alternatives;
    int line = 0;
};

struct GrammarIssue {
    std::string production;
    int alternative = -1; // -1 when the issue is production-wide
    std::string message;
};

struct GrammarAnalysis {
    std::vector<GrammarIssue> issues;
    // LL(1) prediction per production: lookahead token -> alternative.
    std::vector<std::map<std::string, int, std::less<>>> predict;
    // Alternative that derives epsilon (chosen at end of input), or -1.
    std::vector<int> end_alt;
    bool valid() const { return issues.empty(); }
};

struct MimicGrammar {
    std::vector<GrammarProduction> productions; // [0] is the start symbol
    std::vector<std::string> attach_tokens;
    std::vector<std::string> newline_after;
    GrammarAnalysis analysis;
    bool analyzed = false;

    int index_of(std::string_view name) const {
        for (std::size_t i = 0; i < productions.size(); ++i)
            if (productions[i].name == name) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

// Canonical prefix code over m equally likely alternatives: the Huffman
// lengths for equal weights, with lower indices taking the shorter codes.
// Alternative 0 always owns the all-zeros codeword, which is what makes
// zero padding select it.
struct ChoiceCode {
    int m = 1;
    int short_len = 0;   // floor(log2 m)
    int short_count = 0; // alternatives with a short_len codeword

    explicit ChoiceCode(std::size_t alternatives) : m(static_cast<int>(alternatives)) {
        int len = 0;
        while ((1 << (len + 1)) <= m) ++len;
        short_len = len;
        const int r = m - (1 << len);
        short_count = m - 2 * r;
    }

    std::pair<std::uint32_t, int> codeword(int alt) const {
        if (alt < short_count) return {static_cast<std::uint32_t>(alt), short_len};
        return {static_cast<std::uint32_t>(short_count + alt), short_len + 1};
    }

    int read_choice(BitReader& bits) const {
        std::uint32_t v = 0;
        for (int i = 0; i < short_len; ++i)
            v = (v << 1) | static_cast<std::uint32_t>(bits.read_bit_or_zero());
        if (static_cast<int>(v) < short_count) return static_cast<int>(v);
        const std::uint32_t b = static_cast<std::uint32_t>(bits.read_bit_or_zero());
        return static_cast<int>(2 * v + b) - short_count;
    }
};

inline bool is_space_char(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

inline bool contains(const std::vector<std::string>& set, std::string_view token) {
    for (const auto& s : set)
        if (s == token) return true;
    return false;
}

} // namespace detail

inline MimicGrammar parse_grammar(std::string_view text) {
    MimicGrammar g;
    int line_no = 0;
    std::size_t pos = 0;
    auto fail = [&](const std::string& what) {
        throw FormatError("grammar line " + std::to_string(line_no) + ": " + what);
    };

    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                               : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        // Trim.
        while (!line.empty() && detail::is_space_char(line.front())) line.remove_prefix(1);
        while (!line.empty() && detail::is_space_char(line.back())) line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;

        auto split_tokens = [&](std::string_view s) {
            std::vector<std::string> tokens;
            std::size_t i = 0;
            while (i < s.size()) {
                while (i < s.size() && detail::is_space_char(s[i])) ++i;
                std::size_t j = i;
                while (j < s.size() && !detail::is_space_char(s[j])) ++j;
                if (j > i) tokens.emplace_back(s.substr(i, j - i));
                i = j;
            }
            return tokens;
        };

        if (line.front() == '@') {
            auto words = split_tokens(line);
            auto* target = words[0] == "@attach"    ? &g.attach_tokens
                           : words[0] == "@newline" ? &g.newline_after
                                                    : nullptr;
            if (!target) fail("unknown directive '" + words[0] + "'");
            target->insert(target->end(), words.begin() + 1, words.end());
            continue;
        }

        if (line.front() == '|') {
            if (g.productions.empty()) fail("alternative before any production");
            GrammarAlternative alt;
            for (const std::string& tok : split_tokens(line.substr(1))) {
                GrammarSymbol sym;
                if (tok.size() >= 2 && tok.front() == '<' && tok.back() == '>') {
                    if (tok.size() < 3) fail("empty nonterminal reference");
                    sym.is_terminal = false;
                    sym.text = tok.substr(1, tok.size() - 2);
                } else if (tok.find('<') != std::string::npos ||
                           tok.find('>') != std::string::npos) {
                    fail("stray angle bracket in token '" + tok + "'");
                } else {
                    sym.text = tok;
                }
                alt.symbols.push_back(std::move(sym));
            }
            g.productions.back().alternatives.push_back(std::move(alt));
            continue;
        }

        if (line.back() == ':') {
            std::string_view name = line.substr(0, line.size() - 1);
            if (name.empty()) fail("empty production name");
            for (char c : name)
                if (detail::is_space_char(c) || c == '<' || c == '>')
                    fail("invalid production name '" + std::string(name) + "'");
            if (!g.productions.empty() && g.productions.back().alternatives.empty())
                fail("production '" + g.productions.back().name + "' has no alternatives");
            if (g.index_of(name) >= 0) fail("duplicate production name '" + std::string(name) + "'");
            g.productions.push_back({std::string(name), {}, line_no});
            continue;
        }

        fail("expected 'name:', '| alternative', '@directive' or '# comment'");
    }

    if (g.productions.empty()) throw FormatError("grammar has no productions");
    if (g.productions.back().alternatives.empty())
        throw FormatError("grammar line " + std::to_string(g.productions.back().line) +
                          ": production '" + g.productions.back().name + "' has no alternatives");

    // Resolve references; unresolved ones stay -1 for the validator to report.
    for (auto& prod : g.productions)
        for (auto& alt : prod.alternatives)
            for (auto& sym : alt.symbols)
                if (!sym.is_terminal) sym.production = g.index_of(sym.text);
    return g;
}

inline GrammarAnalysis analyze_grammar(const MimicGrammar& g) {
    GrammarAnalysis a;
    const std::size_t count = g.productions.size();
    a.predict.resize(count);
    a.end_alt.assign(count, -1);

    auto issue = [&](std::size_t prod, int alt, std::string msg) {
        a.issues.push_back({g.productions[prod].name, alt, std::move(msg)});
    };

    // Undefined references.
    for (std::size_t p = 0; p < count; ++p)
        for (std::size_t i = 0; i < g.productions[p].alternatives.size(); ++i)
            for (const auto& sym : g.productions[p].alternatives[i].symbols)
                if (!sym.is_terminal && sym.production < 0)
                    issue(p, static_cast<int>(i), "undefined nonterminal <" + sym.text + ">");

    // Nullability (epsilon derivability), fixpoint.
    std::vector<char> nullable(count, 0);
    auto alt_nullable = [&](const GrammarAlternative& alt) {
        for (const auto& sym : alt.symbols) {
            if (sym.is_terminal) return false;
            if (sym.production < 0 || !nullable[static_cast<std::size_t>(sym.production)])
                return false;
        }
        return true;
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t p = 0; p < count; ++p) {
            if (nullable[p]) continue;
            for (const auto& alt : g.productions[p].alternatives)
                if (alt_nullable(alt)) {
                    nullable[p] = 1;
                    changed = true;
                    break;
                }
        }
    }

    // Productivity: every production must derive at least one finite text.
    std::vector<char> productive(count, 0);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t p = 0; p < count; ++p) {
            if (productive[p]) continue;
            for (const auto& alt : g.productions[p].alternatives) {
                bool ok = true;
                for (const auto& sym : alt.symbols)
                    if (!sym.is_terminal &&
                        (sym.production < 0 || !productive[static_cast<std::size_t>(sym.production)]))
                        ok = false;
                if (ok) {
                    productive[p] = 1;
                    changed = true;
                    break;
                }
            }
        }
    }
    for (std::size_t p = 0; p < count; ++p)
        if (!productive[p]) issue(p, -1, "cannot derive any finite text");

    // FIRST sets, fixpoint.
    std::vector<std::set<std::string>> first(count);
    auto first_of_seq = [&](const std::vector<GrammarSymbol>& symbols, std::size_t from,
                            std::set<std::string>& out) {
        // Returns true when the suffix starting at `from` is nullable.
        for (std::size_t i = from; i < symbols.size(); ++i) {
            const auto& sym = symbols[i];
            if (sym.is_terminal) {
                out.insert(sym.text);
                return false;
            }
            if (sym.production < 0) return false;
            const auto q = static_cast<std::size_t>(sym.production);
            out.insert(first[q].begin(), first[q].end());
            if (!nullable[q]) return false;
        }
        return true;
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t p = 0; p < count; ++p)
            for (const auto& alt : g.productions[p].alternatives) {
                std::set<std::string> acc;
                first_of_seq(alt.symbols, 0, acc);
                for (const auto& t : acc)
                    if (first[p].insert(t).second) changed = true;
            }
    }

    // Left recursion through nullable prefixes.
    {
        std::vector<std::vector<std::size_t>> edges(count);
        for (std::size_t p = 0; p < count; ++p)
            for (const auto& alt : g.productions[p].alternatives)
                for (const auto& sym : alt.symbols) {
                    if (sym.is_terminal) break;
                    if (sym.production >= 0)
                        edges[p].push_back(static_cast<std::size_t>(sym.production));
                    if (sym.production < 0 || !nullable[static_cast<std::size_t>(sym.production)])
                        break;
                }
        std::vector<char> state(count, 0); // 0 new, 1 on stack, 2 done
        auto dfs = [&](auto&& self, std::size_t p) -> bool {
            state[p] = 1;
            for (std::size_t q : edges[p]) {
                if (state[q] == 1) {
                    issue(q, -1, "left recursion without consuming a terminal");
                    return true;
                }
                if (state[q] == 0 && self(self, q)) return true;
            }
            state[p] = 2;
            return false;
        };
        for (std::size_t p = 0; p < count; ++p)
            if (state[p] == 0 && dfs(dfs, p)) break;
    }

    // FOLLOW sets. Derivations of the start symbol concatenate, so the start
    // symbol is followed by its own FIRST set as well as end-of-input.
    std::vector<std::set<std::string>> follow(count);
    std::vector<char> end_in_follow(count, 0);
    follow[0] = first[0];
    end_in_follow[0] = 1;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t p = 0; p < count; ++p)
            for (const auto& alt : g.productions[p].alternatives)
                for (std::size_t i = 0; i < alt.symbols.size(); ++i) {
                    const auto& sym = alt.symbols[i];
                    if (sym.is_terminal || sym.production < 0) continue;
                    const auto q = static_cast<std::size_t>(sym.production);
                    std::set<std::string> rest;
                    const bool rest_nullable = first_of_seq(alt.symbols, i + 1, rest);
                    for (const auto& t : rest)
                        if (follow[q].insert(t).second) changed = true;
                    if (rest_nullable) {
                        for (const auto& t : follow[p])
                            if (follow[q].insert(t).second) changed = true;
                        if (end_in_follow[p] && !end_in_follow[q]) {
                            end_in_follow[q] = 1;
                            changed = true;
                        }
                    }
                }
    }

    // LL(1) prediction table; collisions are exactly the LL(1) violations.
    for (std::size_t p = 0; p < count; ++p) {
        const auto& alts = g.productions[p].alternatives;
        int nullable_alts = 0;
        for (std::size_t i = 0; i < alts.size(); ++i) {
            std::set<std::string> begin;
            const bool is_nullable = first_of_seq(alts[i].symbols, 0, begin);
            if (is_nullable) {
                ++nullable_alts;
                if (a.end_alt[p] < 0) a.end_alt[p] = static_cast<int>(i);
                for (const auto& t : follow[p]) begin.insert(t);
            }
            for (const auto& t : begin) {
                auto [it, inserted] = a.predict[p].emplace(t, static_cast<int>(i));
                if (!inserted && it->second != static_cast<int>(i))
                    issue(p, static_cast<int>(i),
                          "LL(1) conflict with alternative " + std::to_string(it->second) +
                              " on token '" + t + "'");
            }
        }
        if (nullable_alts > 1)
            issue(p, -1, "more than one alternative can derive the empty string");
    }

    // Zero padding must terminate: taking alternative 0 everywhere has to be
    // acyclic.
    {
        std::vector<char> state(count, 0);
        auto dfs = [&](auto&& self, std::size_t p) -> bool {
            state[p] = 1;
            for (const auto& sym : g.productions[p].alternatives[0].symbols) {
                if (sym.is_terminal || sym.production < 0) continue;
                const auto q = static_cast<std::size_t>(sym.production);
                if (state[q] == 1) {
                    issue(q, 0, "zero padding cannot terminate (alternative-0 cycle)");
                    return true;
                }
                if (state[q] == 0 && self(self, q)) return true;
            }
            state[p] = 2;
            return false;
        };
        for (std::size_t p = 0; p < count; ++p)
            if (state[p] == 0 && dfs(dfs, p)) break;
    }

    // Unbounded capacity: some productive choice point (m >= 2) must be
    // reachable from the start symbol and from itself.
    {
        std::vector<std::vector<std::size_t>> succ(count);
        for (std::size_t p = 0; p < count; ++p)
            for (const auto& alt : g.productions[p].alternatives)
                for (const auto& sym : alt.symbols)
                    if (!sym.is_terminal && sym.production >= 0)
                        succ[p].push_back(static_cast<std::size_t>(sym.production));
        auto reachable_from = [&](std::size_t src) {
            std::vector<char> seen(count, 0);
            std::vector<std::size_t> work{src};
            while (!work.empty()) {
                const std::size_t p = work.back();
                work.pop_back();
                for (std::size_t q : succ[p])
                    if (!seen[q]) {
                        seen[q] = 1;
                        work.push_back(q);
                    }
            }
            return seen;
        };
        const std::vector<char> from_start = reachable_from(0);
        bool has_recursive_choice = false;
        for (std::size_t p = 0; p < count && !has_recursive_choice; ++p) {
            if (g.productions[p].alternatives.size() < 2 || !productive[p]) continue;
            if (p != 0 && !from_start[p]) continue;
            if (reachable_from(p)[p]) has_recursive_choice = true;
        }
        if (!has_recursive_choice)
            a.issues.push_back(
                {g.productions[0].name, -1,
                 "no reachable recursive choice point; long payloads cannot fit"});
    }

    // Attach-token sanity: tokenization splits attach tokens off the end of
    // whitespace chunks, so no other terminal may end with one.
    for (const auto& attach : g.attach_tokens) {
        for (const auto& other : g.attach_tokens)
            if (&attach != &other && other.size() > attach.size() &&
                other.ends_with(attach))
                a.issues.push_back({g.productions[0].name, -1,
                                    "attach token '" + other + "' ends with attach token '" +
                                        attach + "'"});
        for (std::size_t p = 0; p < count; ++p)
            for (std::size_t i = 0; i < g.productions[p].alternatives.size(); ++i)
                for (const auto& sym : g.productions[p].alternatives[i].symbols)
                    if (sym.is_terminal && sym.text != attach && sym.text.ends_with(attach))
                        issue(p, static_cast<int>(i),
                              "terminal '" + sym.text + "' ends with attach token '" + attach +
                                  "' (ambiguous tokenization)");
    }

    return a;
}

inline std::vector<GrammarIssue> validate_grammar(const MimicGrammar& g) {
    return analyze_grammar(g).issues;
}

inline MimicGrammar load_grammar(std::string_view text) {
    MimicGrammar g = parse_grammar(text);
    g.analysis = analyze_grammar(g);
    g.analyzed = true;
    if (!g.analysis.valid()) {
        std::string msg = "invalid grammar:";
        std::size_t shown = 0;
        for (const auto& iss : g.analysis.issues) {
            if (++shown > 5) {
                msg += " ...";
                break;
            }
            msg += " [" + iss.production +
                   (iss.alternative >= 0 ? "/" + std::to_string(iss.alternative) : "") + "] " +
                   iss.message + ";";
        }
        throw FormatError(msg);
    }
    return g;
}

namespace detail {

inline const GrammarAnalysis& require_valid(const MimicGrammar& g, GrammarAnalysis& scratch) {
    const GrammarAnalysis* a = &g.analysis;
    if (!g.analyzed) {
        scratch = analyze_grammar(g);
        a = &scratch;
    }
    if (!a->valid())
        throw UsageError("grammar is invalid: " + a->issues.front().message);
    return *a;
}

inline std::string render_tokens(const std::vector<std::string>& tokens, const MimicGrammar& g) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) {
            if (contains(g.attach_tokens, tokens[i])) {
                // glued to the previous token
            } else if (contains(g.newline_after, tokens[i - 1])) {
                out += '\n';
            } else {
                out += ' ';
            }
        }
        out += tokens[i];
    }
    return out;
}

inline std::vector<std::string> tokenize_stego_text(std::string_view text,
                                                    const MimicGrammar& g) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space_char(text[i])) ++i;
        std::size_t j = i;
        while (j < text.size() && !is_space_char(text[j])) ++j;
        if (j == i) break;
        std::string chunk(text.substr(i, j - i));
        i = j;

        std::vector<std::string> tail;
        for (bool split = true; split;) {
            split = false;
            const std::string* best = nullptr;
            for (const auto& attach : g.attach_tokens)
                if (chunk.size() > attach.size() && chunk.ends_with(attach) &&
                    (!best || attach.size() > best->size()))
                    best = &attach;
            if (best) {
                tail.push_back(*best);
                chunk.resize(chunk.size() - best->size());
                split = true;
            }
        }
        tokens.push_back(std::move(chunk));
        tokens.insert(tokens.end(), tail.rbegin(), tail.rend());
    }
    return tokens;
}

} // namespace detail

inline std::string mimic_encode(const Bytes& frame, const MimicGrammar& g) {
    GrammarAnalysis scratch;
    detail::require_valid(g, scratch);

    BitReader bits(frame);
    std::vector<std::string> tokens;
    const GrammarSymbol start{false, g.productions[0].name, 0};
    std::vector<const GrammarSymbol*> stack{&start};

    while (!stack.empty() || !bits.empty()) {
        if (stack.empty()) stack.push_back(&start); // next derivation
        const GrammarSymbol* sym = stack.back();
        stack.pop_back();
        if (sym->is_terminal) {
            tokens.push_back(sym->text);
            continue;
        }
        const auto& prod = g.productions[static_cast<std::size_t>(sym->production)];
        int alt = 0;
        if (prod.alternatives.size() > 1)
            alt = detail::ChoiceCode(prod.alternatives.size()).read_choice(bits);
        const auto& symbols = prod.alternatives[static_cast<std::size_t>(alt)].symbols;
        for (auto it = symbols.rbegin(); it != symbols.rend(); ++it) stack.push_back(&*it);
    }
    return detail::render_tokens(tokens, g);
}

// Replays the LL(1) derivation and reassembles the payload frame. Trailing
// text beyond the frame's self-described length is encoder padding and is
// ignored.
inline Bytes mimic_decode_frame(const std::string& text, const MimicGrammar& g) {
    GrammarAnalysis scratch;
    const GrammarAnalysis& analysis = detail::require_valid(g, scratch);

    const std::vector<std::string> tokens = detail::tokenize_stego_text(text, g);
    FrameBitSink sink;
    const GrammarSymbol start{false, g.productions[0].name, 0};
    std::vector<const GrammarSymbol*> stack;
    std::size_t pos = 0;

    while (sink.wants_more()) {
        if (stack.empty()) {
            if (pos == tokens.size())
                throw IntegrityError("text ended before the payload frame was complete");
            stack.push_back(&start);
        }
        const GrammarSymbol* sym = stack.back();
        stack.pop_back();

        if (sym->is_terminal) {
            if (pos >= tokens.size())
                throw IntegrityError("text ended before the payload frame was complete "
                                     "(expected '" + sym->text + "')");
            if (tokens[pos] != sym->text)
                throw FormatError("parse error at token " + std::to_string(pos) + ": got '" +
                                  tokens[pos] + "', expected '" + sym->text + "'");
            ++pos;
            continue;
        }

        const auto p = static_cast<std::size_t>(sym->production);
        const auto& prod = g.productions[p];
        int alt = 0;
        if (prod.alternatives.size() > 1) {
            if (pos < tokens.size()) {
                const auto it = analysis.predict[p].find(tokens[pos]);
                if (it == analysis.predict[p].end())
                    throw FormatError("parse error at token " + std::to_string(pos) + ": '" +
                                      tokens[pos] + "' cannot start <" + prod.name + ">");
                alt = it->second;
            } else {
                alt = analysis.end_alt[p];
                if (alt < 0)
                    throw IntegrityError("text ended before the payload frame was complete");
            }
            const auto [value, len] = detail::ChoiceCode(prod.alternatives.size()).codeword(alt);
            for (int i = len - 1; i >= 0 && sink.wants_more(); --i)
                sink.push_bit(static_cast<int>((value >> i) & 1));
        }
        const auto& symbols = prod.alternatives[static_cast<std::size_t>(alt)].symbols;
        for (auto it = symbols.rbegin(); it != symbols.rend(); ++it) stack.push_back(&*it);
    }
    return sink.take_frame();
}

inline ParsedFrame mimic_decode(const std::string& text, const MimicGrammar& g,
                                const std::optional<Passphrase>& pass = std::nullopt) {
    return parse_frame(mimic_decode_frame(text, g), pass);
}

} // namespace stego
