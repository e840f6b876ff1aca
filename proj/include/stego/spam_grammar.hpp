#pragma once

#include <string_view>

// Default mimic grammar, written in the classic bulk-mail register. Every
// production keeps the first token of each alternative distinct (LL(1)), and
// alternative 0 always terminates so zero padding closes the text.

namespace stego {

inline std::string_view default_spam_grammar() {
    static constexpr std::string_view text = R"GRAMMAR(# Default spam-mimic grammar.
# The first production is the start symbol. Alternative choices carry the
# payload bits; see the repository documentation for the file format.

@newline . !

message:
| <greeting> <sentence> <more-sentences> <closing>

greeting:
| Dear <dear-name> ,
| Hello <hello-name> ,
| Greetings <greeting-tail> ,
| Attention please ,

dear-name:
| Friend
| Sir or Madam
| Valued Customer
| Cybercitizen
| Colleague
| Winner
| Member
| Subscriber

hello-name:
| friend
| neighbor
| colleague
| reader

greeting-tail:
| to you
| from the team
| dear member
| fellow entrepreneur

more-sentences:
|
| <sentence> <more-sentences>

sentence:
| This is <claim> .
| We <promise> <object> .
| You are guaranteed to <benefit> !
| Our <product> will <improve> your <asset> .
| Money back if you are not <adjective> !
| Act <urgency> and <reward> !
| Remember , <reassurance> .
| Sign up <signup-target> and you will get a discount of <percent> !

claim:
| a one time mailing
| not a get rich scheme
| the chance you have waited for
| an exclusive invitation
| your lucky day
| 100% legal in all states
| absolutely free to try
| certified by our compliance team

promise:
| help you sell
| guarantee
| promise
| offer
| deliver
| teach
| show
| send

object:
| more products
| real results
| financial freedom
| a better website
| instant traffic
| serious income
| new customers
| total privacy

benefit:
| succeed
| profit
| prosper
| win

product:
| system
| method
| program
| newsletter

improve:
| double
| boost
| improve
| transform

asset:
| income
| business
| response rate
| web traffic

adjective:
| satisfied
| impressed
| delighted
| convinced

urgency:
| now
| today
| immediately
| before midnight

reward:
| become rich within 45 days
| capitalize on this
| beat the crowd
| secure your spot

reassurance:
| we take all the risk
| you can cancel at any time
| this message complies with Senate bill 1618
| no experience is required

signup-target:
| a friend
| your family

percent:
| 10%
| 20%
| 30%
| 40%
| 50%
| 60%
| 70%
| 80%

closing:
| Sincerely , <sender>
| Best regards , <sender>
| Cheers , <sender>
| Yours truly , <sender>

sender:
| your friends at the Institute
| the Marketing Team
| Ms Parker of Ohio
| Dr Jones
)GRAMMAR";
    return text;
}

} // namespace stego
