use alloc::string::ToString;
use alloc::vec;

use super::*;
use crate::expr::{BinOp, Expr};
use crate::value::Value;

const CD: &str = "\
class Account {
  attr balance: Int
  attr owner: Ref
  method deposit(amount: Int): Bool
  invariant balance >= 0
}

class Savings extends Account {
}

assoc holds: Account -> Account
";

const SD: &str = "\
statemachine Account {
  states Open, Closed;
  initial Open;
  trans Open -> Open on deposit(amount) if amount > 0 / balance = balance + amount, emit ok(balance) to sender
  trans Open -> Closed on close() / emit return closed() to @env
}
";

#[test]
fn class_diagram_roundtrip() {
    let doc = parse("a.cd", DocumentKind::ClassDiagram, CD).unwrap();
    assert_eq!(serialize(&doc), CD);
    let body = doc.as_class().unwrap();
    assert_eq!(body.classes().count(), 2);
    assert_eq!(doc.span(NodeRef::Member(0, 3)).unwrap().start.line, 5);
}

#[test]
fn state_diagram_roundtrip() {
    let doc = parse("a.sd", DocumentKind::StateDiagram, SD).unwrap();
    assert_eq!(serialize(&doc), SD);
    let sd = doc.as_state().unwrap();
    assert_eq!(sd.transitions[0].actions.len(), 1);
    assert_eq!(sd.transitions[1].outputs[0].kind, crate::MessageKind::Return);
}

#[test]
fn sequence_and_object_roundtrip() {
    let qd = "sequence S {\n  objects a: Account;\n  env -> a : deposit(5)\n  state a : Open\n  a -> env : ok(5)\n}\n";
    let doc = parse("s.qd", DocumentKind::SequenceDiagram, qd).unwrap();
    assert_eq!(serialize(&doc), qd);
    let od = "objects {\n  a: Account { balance = 3, owner = null }\n  b: Account {}\n  link holds a -> b\n  creatable c: Account by env\n}\n";
    let doc = parse("o.od", DocumentKind::ObjectDiagram, od).unwrap();
    assert_eq!(serialize(&doc), od);
}

#[test]
fn undeclared_state_is_reported_with_position() {
    let err = parse("x.sd", DocumentKind::StateDiagram, "statemachine A {\n  states S;\n  initial S;\n  trans S -> T on f()\n}").unwrap_err();
    match err {
        ParseError::UndeclaredName { pos, name, .. } => {
            assert_eq!(name, "T");
            assert_eq!(pos, crate::report::Pos::new(4, 14));
        }
        e => panic!("{e}"),
    }
}

#[test]
fn syntax_error_names_expected_tokens() {
    let err = parse("x.cd", DocumentKind::ClassDiagram, "class A { attr x Int }").unwrap_err();
    assert_eq!(err.to_string(), "1:18: unexpected `Int`, expected `:`");
}

#[test]
fn duplicate_names_rejected() {
    assert!(matches!(
        parse("x.cd", DocumentKind::ClassDiagram, "class A {}\nclass A {}"),
        Err(ParseError::DuplicateName { .. })
    ));
    assert!(matches!(
        parse("x.od", DocumentKind::ObjectDiagram, "objects { a: A a: A }"),
        Err(ParseError::DuplicateName { .. })
    ));
}

#[test]
fn expressions_parse_with_precedence() {
    let e = parse_expr("a + 2 * b > 3 and not c").unwrap();
    let expected = Expr::bin(
        BinOp::And,
        Expr::bin(
            BinOp::Gt,
            Expr::bin(BinOp::Add, Expr::var("a"), Expr::bin(BinOp::Mul, Expr::int(2), Expr::var("b"))),
            Expr::int(3),
        ),
        Expr::not(Expr::var("c")),
    );
    assert_eq!(e, expected);
    assert_eq!(parse_expr("-9223372036854775808").unwrap(), Expr::int(i64::MIN));
    assert!(parse_expr("9223372036854775808").is_err());
    assert!(parse_expr("a < b < c").is_err());
}

#[test]
fn stimuli_roundtrip() {
    let text = "round 0: env -> a . deposit(5)\nround 2: env -> b . open(\"x\", true)\n";
    let s = parse_stimuli(text).unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!(s[1].message.args, vec![Value::Str("x".into()), Value::Bool(true)]);
    assert_eq!(serialize_stimuli(&s), text);
    assert!(parse_stimuli("round 0: a -> b . f()").is_err());
}

#[test]
fn unknown_extension() {
    assert_eq!(
        parse_with_extension("x.zz", "zz", ""),
        Err(ParseError::UnknownKind("zz".to_string()))
    );
}
