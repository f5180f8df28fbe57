//! Parsing a communicator reply into topic-tagged questions.
//!
//!     cargo run --example parse_questions

use clarifier::fixtures;
use clarifier::prompting::{format_question_list, parse_question_list};

fn main() {
    let messy = "Sure! A few things:\n\n\
        **Input Validation**\n\
        1) Should negative n be rejected?\n\
        - What about n that is not an int?\n\n\
        ## Performance Requirements\n\
        * Is n ever large enough that recursion\n  depth matters?\n\
        Testing: Do you want unit tests?\n\
        Anything else I should know?\n";
    for q in parse_question_list(messy) {
        println!("{:>2}  {:<25} {}", q.source_order, q.topic.label(), q.text);
    }

    let table = parse_question_list(fixtures::TAXONOMY_QUESTIONS);
    println!(
        "\nthe shipped taxonomy fixture has {} questions; normalized form:\n",
        table.len()
    );
    print!("{}", format_question_list(&table[..5]));
}
