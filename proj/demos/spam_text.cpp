// Turns a short message into spam text and decodes it again.

#include <cstdio>

#include "stego/mimic.hpp"
#include "stego/spam_grammar.hpp"

using namespace stego;

int main() {
    const MimicGrammar grammar = load_grammar(default_spam_grammar());
    const Bytes message = to_bytes("This is a secret message!");

    const std::string spam = mimic_encode(frame_payload(message, ""), grammar);
    std::printf("--- stego text (%zu characters) ---\n%s\n---\n", spam.size(), spam.c_str());

    const ParsedFrame back = mimic_decode(spam, grammar);
    std::printf("decoded: %s\n", to_string(back.body).c_str());
    return 0;
}
