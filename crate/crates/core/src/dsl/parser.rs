//! Recursive-descent parser for the diagram notations.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dsl::ast::*;
use crate::dsl::lexer::{tokenize, Tok, TokKind};
use crate::dsl::{ParseError, Stimulus};
use crate::expr::{BinOp, Expr, UnOp};
use crate::ids::{ClassName, ObjectId, ENV};
use crate::model::{
    Association, Assignment, Attribute, Message, MessageKind, Method, OutputTemplate, Param,
    Transition, Trigger,
};
use crate::report::{Pos, Span};
use crate::value::{Value, ValueType};

pub(crate) const KEYWORDS: &[&str] = &[
    "class", "extends", "attr", "method", "invariant", "assoc", "statemachine", "states",
    "initial", "trans", "on", "if", "emit", "to", "return", "sequence", "objects", "link",
    "creatable", "by", "state", "and", "or", "not", "div", "true", "false", "null", "self",
    "sender", "Int", "Bool", "String", "Ref",
];

pub fn is_reserved(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Parses one diagram of the given kind. `id` names the document, usually
/// its path.
pub fn parse(id: &str, kind: DocumentKind, text: &str) -> Result<Document, ParseError> {
    let (body, spans) = if kind == DocumentKind::Text {
        (Body::Text(text.to_owned()), SpanMap::new())
    } else {
        let mut p = Parser::new(text)?;
        let body = match kind {
            DocumentKind::ClassDiagram => Body::Class(p.class_diagram()?),
            DocumentKind::StateDiagram => Body::State(p.state_diagram()?),
            DocumentKind::SequenceDiagram => Body::Sequence(p.sequence_diagram()?),
            DocumentKind::ObjectDiagram => Body::Object(p.object_diagram()?),
            DocumentKind::Text => unreachable!(),
        };
        p.expect_eof()?;
        (body, p.spans)
    };
    Ok(Document { id: id.to_owned(), body, source: text.to_owned(), spans })
}

/// Parses a kind given by its extension (`cd`, `od`, `sd`, `qd`, `txt`).
pub fn parse_with_extension(id: &str, ext: &str, text: &str) -> Result<Document, ParseError> {
    let kind = DocumentKind::from_extension(ext).ok_or_else(|| ParseError::UnknownKind(ext.to_owned()))?;
    parse(id, kind, text)
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Stimuli file: lines `round <n>: env -> <id> . <selector>(<literals>)`.
pub fn parse_stimuli(text: &str) -> Result<Vec<Stimulus>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    while !p.at_eof() {
        let round_tok = p.peek().clone();
        match &round_tok.kind {
            TokKind::Word(w) if w == "round" => {
                p.bump();
            }
            _ => return Err(p.unexpected(&["`round`"])),
        }
        let round = match p.bump().kind {
            TokKind::Int(n) => usize::try_from(n).map_err(|_| ParseError::syntax(round_tok.start, "round", &["smaller round"]))?,
            _ => return Err(p.unexpected_prev(&["round number"])),
        };
        p.expect_sym(":")?;
        let sender = p.role_name()?;
        if sender != ENV {
            return Err(ParseError::syntax(p.prev_start(), alloc::format!("`{sender}`"), &["`env`"]));
        }
        p.expect_sym("->")?;
        let receiver = p.role_name()?;
        p.expect_sym(".")?;
        let selector = p.ident("selector")?;
        let args = p.literal_list()?;
        out.push(Stimulus {
            round,
            message: Message::call(ObjectId::env(), ObjectId::new(receiver), &selector, args),
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    i: usize,
    spans: SpanMap,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(text)?, i: 0, spans: SpanMap::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i]
    }

    fn peek_at(&self, k: usize) -> &TokKind {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].kind
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokKind::Eof
    }

    fn start(&self) -> Pos {
        self.peek().start
    }

    fn prev_start(&self) -> Pos {
        self.toks[self.i.saturating_sub(1)].start
    }

    fn prev_end(&self) -> Pos {
        self.toks[self.i.saturating_sub(1)].end
    }

    fn mark(&mut self, node: NodeRef, start: Pos) {
        let end = self.prev_end();
        self.spans.insert(node, Span::new(start, end));
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError::syntax(t.start, t.kind.to_string(), expected)
    }

    fn unexpected_prev(&self, expected: &[&str]) -> ParseError {
        let t = &self.toks[self.i.saturating_sub(1)];
        ParseError::syntax(t.start, t.kind.to_string(), expected)
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokKind::Word(w) if w == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.at_kw(kw);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_kw(&mut self, kw: &'static str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&[&alloc::format!("`{kw}`")]))
        }
    }

    fn at_sym(&self, sym: &str) -> bool {
        matches!(self.peek().kind, TokKind::Sym(s) if s == sym)
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        let hit = self.at_sym(sym);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_sym(&mut self, sym: &'static str) -> Result<(), ParseError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.unexpected(&[&alloc::format!("`{sym}`")]))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected(&["end of input"]))
        }
    }

    /// Non-reserved identifier.
    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match &self.peek().kind {
            TokKind::Word(w) if !is_reserved(w) => {
                let w = w.clone();
                self.bump();
                Ok(w)
            }
            _ => Err(self.unexpected(&[what])),
        }
    }

    fn role_name(&mut self) -> Result<String, ParseError> {
        self.ident("object name")
    }

    fn value_type(&mut self) -> Result<ValueType, ParseError> {
        match &self.peek().kind {
            TokKind::Word(w) => match ValueType::from_keyword(w) {
                Some(t) => {
                    self.bump();
                    Ok(t)
                }
                None => Err(self.unexpected(&["type"])),
            },
            _ => Err(self.unexpected(&["type"])),
        }
    }

    fn comma_separated<T>(
        &mut self,
        close: &'static str,
        mut item: impl FnMut(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Vec<T>, ParseError> {
        let mut out = Vec::new();
        if self.eat_sym(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat_sym(close) {
                return Ok(out);
            }
            if !self.eat_sym(",") {
                return Err(self.unexpected(&["`,`", &alloc::format!("`{close}`")]));
            }
        }
    }

    // ---- literals and expressions ----

    fn literal(&mut self) -> Result<Value, ParseError> {
        let t = self.peek().clone();
        let v = match &t.kind {
            TokKind::Int(n) => {
                self.bump();
                Value::Int(i64::try_from(*n).map_err(|_| ParseError::syntax(t.start, "integer literal", &["smaller integer"]))?)
            }
            TokKind::Sym("-") => {
                self.bump();
                match self.bump().kind {
                    TokKind::Int(n) => Value::Int(negate(n).ok_or_else(|| {
                        ParseError::syntax(t.start, "integer literal", &["smaller integer"])
                    })?),
                    _ => return Err(self.unexpected_prev(&["integer"])),
                }
            }
            TokKind::Str(s) => {
                let s = s.clone();
                self.bump();
                Value::Str(s)
            }
            TokKind::Word(w) if w == "true" || w == "false" => {
                let b = w == "true";
                self.bump();
                Value::Bool(b)
            }
            TokKind::Word(w) if w == "null" => {
                self.bump();
                Value::Ref(None)
            }
            TokKind::Sym("@") => {
                self.bump();
                Value::Ref(Some(ObjectId::new(self.role_name()?)))
            }
            _ => return Err(self.unexpected(&["literal"])),
        };
        Ok(v)
    }

    fn literal_list(&mut self) -> Result<Vec<Value>, ParseError> {
        self.expect_sym("(")?;
        self.comma_separated(")", Self::literal)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.eat_kw("or") {
            let rhs = self.and_expr()?;
            lhs = Expr::bin(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.not_expr()?;
        while self.eat_kw("and") {
            let rhs = self.not_expr()?;
            lhs = Expr::bin(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat_kw("not") {
            Ok(Expr::not(self.not_expr()?))
        } else {
            self.cmp_expr()
        }
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.add_expr()?;
        let op = match self.peek().kind {
            TokKind::Sym("==") => BinOp::Eq,
            TokKind::Sym("!=") => BinOp::Ne,
            TokKind::Sym("<") => BinOp::Lt,
            TokKind::Sym("<=") => BinOp::Le,
            TokKind::Sym(">") => BinOp::Gt,
            TokKind::Sym(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.add_expr()?;
        Ok(Expr::bin(op, lhs, rhs))
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek().kind {
                TokKind::Sym("+") => BinOp::Add,
                TokKind::Sym("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul_expr()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = if self.at_sym("*") {
                BinOp::Mul
            } else if self.at_kw("div") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.unary_expr()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        if self.at_sym("-") {
            if let TokKind::Int(_) = self.peek_at(1) {
                return Ok(Expr::Lit(self.literal()?));
            }
            self.bump();
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary_expr()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match &t.kind {
            TokKind::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            TokKind::Word(w) if w == "self" => {
                self.bump();
                Ok(Expr::SelfRef)
            }
            TokKind::Word(w) if w == "sender" => {
                self.bump();
                Ok(Expr::SenderRef)
            }
            TokKind::Word(w) if !is_reserved(w) => {
                let w = w.clone();
                self.bump();
                Ok(Expr::Var(w))
            }
            TokKind::Int(_) | TokKind::Str(_) | TokKind::Sym("@") => Ok(Expr::Lit(self.literal()?)),
            TokKind::Word(w) if w == "true" || w == "false" || w == "null" => {
                Ok(Expr::Lit(self.literal()?))
            }
            _ => Err(self.unexpected(&["expression"])),
        }
    }

    // ---- class diagrams ----

    fn class_diagram(&mut self) -> Result<ClassDiagramBody, ParseError> {
        let mut body = ClassDiagramBody::default();
        let mut class_names = BTreeSet::new();
        let mut assoc_names = BTreeSet::new();
        while !self.at_eof() {
            let start = self.start();
            let idx = body.items.len();
            if self.eat_kw("class") {
                let name_pos = self.start();
                let name = self.ident("class name")?;
                if !class_names.insert(name.clone()) {
                    return Err(ParseError::DuplicateName { pos: name_pos, what: "class", name });
                }
                let decl = self.class_decl(idx, ClassName::new(name))?;
                body.items.push(ClassItem::Class(decl));
            } else if self.eat_kw("assoc") {
                let name_pos = self.start();
                let name = self.ident("association name")?;
                if !assoc_names.insert(name.clone()) {
                    return Err(ParseError::DuplicateName { pos: name_pos, what: "association", name });
                }
                self.expect_sym(":")?;
                let source = ClassName::new(self.ident("class name")?);
                self.expect_sym("->")?;
                let target = ClassName::new(self.ident("class name")?);
                body.items.push(ClassItem::Assoc(Association { name, source, target }));
            } else {
                return Err(self.unexpected(&["`class`", "`assoc`"]));
            }
            self.mark(NodeRef::Item(idx), start);
        }
        Ok(body)
    }

    fn class_decl(&mut self, idx: usize, name: ClassName) -> Result<ClassDecl, ParseError> {
        let parent = if self.eat_kw("extends") {
            Some(ClassName::new(self.ident("class name")?))
        } else {
            None
        };
        self.expect_sym("{")?;
        let mut members = Vec::new();
        let mut attrs = BTreeSet::new();
        let mut methods = BTreeSet::new();
        while !self.eat_sym("}") {
            let start = self.start();
            let member = if self.eat_kw("attr") {
                let pos = self.start();
                let name = self.ident("attribute name")?;
                if !attrs.insert(name.clone()) {
                    return Err(ParseError::DuplicateName { pos, what: "attribute", name });
                }
                self.expect_sym(":")?;
                Member::Attr(Attribute { name, ty: self.value_type()? })
            } else if self.eat_kw("method") {
                let pos = self.start();
                let name = self.ident("method name")?;
                if !methods.insert(name.clone()) {
                    return Err(ParseError::DuplicateName { pos, what: "method", name });
                }
                self.expect_sym("(")?;
                let mut seen = BTreeSet::new();
                let params = self.comma_separated(")", |p| {
                    let pos = p.start();
                    let pname = p.ident("parameter name")?;
                    if !seen.insert(pname.clone()) {
                        return Err(ParseError::DuplicateName { pos, what: "parameter", name: pname });
                    }
                    p.expect_sym(":")?;
                    Ok(Param { name: pname, ty: p.value_type()? })
                })?;
                self.expect_sym(":")?;
                Member::Method(Method { name, params, result: self.value_type()? })
            } else if self.eat_kw("invariant") {
                Member::Invariant(self.expr()?)
            } else {
                return Err(self.unexpected(&["`attr`", "`method`", "`invariant`", "`}`"]));
            };
            self.mark(NodeRef::Member(idx, members.len()), start);
            members.push(member);
        }
        Ok(ClassDecl { name, parent, members })
    }

    // ---- state diagrams ----

    fn state_list(&mut self, what: &'static str) -> Result<Vec<(String, Pos, Pos)>, ParseError> {
        let mut out: Vec<(String, Pos, Pos)> = Vec::new();
        loop {
            let start = self.start();
            let name = self.ident("state name")?;
            if out.iter().any(|(n, ..)| *n == name) {
                return Err(ParseError::DuplicateName { pos: start, what, name });
            }
            out.push((name, start, self.prev_end()));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(";")?;
        Ok(out)
    }

    fn state_diagram(&mut self) -> Result<StateDiagramBody, ParseError> {
        let start = self.start();
        self.expect_kw("statemachine")?;
        let class = ClassName::new(self.ident("class name")?);
        self.mark(NodeRef::Header, start);
        self.expect_sym("{")?;
        self.expect_kw("states")?;
        let states_decl = self.state_list("state")?;
        for (i, (_, s, e)) in states_decl.iter().enumerate() {
            self.spans.insert(NodeRef::State(i), Span::new(*s, *e));
        }
        let states: Vec<String> = states_decl.into_iter().map(|(n, ..)| n).collect();
        self.expect_kw("initial")?;
        let initial_decl = self.state_list("initial state")?;
        let mut initial = Vec::new();
        for (i, (name, s, e)) in initial_decl.into_iter().enumerate() {
            if !states.contains(&name) {
                return Err(ParseError::UndeclaredName { pos: s, what: "state", name });
            }
            self.spans.insert(NodeRef::Initial(i), Span::new(s, e));
            initial.push(name);
        }
        let mut transitions = Vec::new();
        while !self.eat_sym("}") {
            let start = self.start();
            if !self.eat_kw("trans") {
                return Err(self.unexpected(&["`trans`", "`}`"]));
            }
            let t = self.transition(&states)?;
            self.eat_sym(";");
            self.mark(NodeRef::Transition(transitions.len()), start);
            transitions.push(t);
        }
        Ok(StateDiagramBody { class, states, initial, transitions })
    }

    fn declared_state(&mut self, states: &[String]) -> Result<String, ParseError> {
        let pos = self.start();
        let name = self.ident("state name")?;
        if states.contains(&name) {
            Ok(name)
        } else {
            Err(ParseError::UndeclaredName { pos, what: "state", name })
        }
    }

    fn transition(&mut self, states: &[String]) -> Result<Transition, ParseError> {
        let source = self.declared_state(states)?;
        self.expect_sym("->")?;
        let target = self.declared_state(states)?;
        self.expect_kw("on")?;
        let selector = self.ident("trigger")?;
        self.expect_sym("(")?;
        let mut seen = BTreeSet::new();
        let params = self.comma_separated(")", |p| {
            let pos = p.start();
            let name = p.ident("parameter name")?;
            if !seen.insert(name.clone()) {
                return Err(ParseError::DuplicateName { pos, what: "parameter", name });
            }
            Ok(name)
        })?;
        let guard = if self.eat_kw("if") { Some(self.expr()?) } else { None };
        let mut actions = Vec::new();
        let mut outputs = Vec::new();
        if self.eat_sym("/") {
            loop {
                if self.eat_kw("emit") {
                    let kind = if self.eat_kw("return") { MessageKind::Return } else { MessageKind::Call };
                    let selector = self.ident("selector")?;
                    self.expect_sym("(")?;
                    let args = self.comma_separated(")", Self::expr)?;
                    self.expect_kw("to")?;
                    let target = self.expr()?;
                    outputs.push(OutputTemplate { kind, selector, args, target });
                } else {
                    let attribute = self.ident("`emit` or attribute name")?;
                    self.expect_sym("=")?;
                    actions.push(Assignment { attribute, value: self.expr()? });
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        Ok(Transition {
            source,
            target,
            trigger: Trigger { selector, params },
            guard,
            actions,
            outputs,
        })
    }

    // ---- sequence diagrams ----

    fn sequence_diagram(&mut self) -> Result<SequenceDiagramBody, ParseError> {
        let start = self.start();
        self.expect_kw("sequence")?;
        let name = self.ident("diagram name")?;
        self.mark(NodeRef::Header, start);
        self.expect_sym("{")?;
        self.expect_kw("objects")?;
        let mut lifelines: Vec<Lifeline> = Vec::new();
        loop {
            let start = self.start();
            let role = self.role_name()?;
            if role == ENV || lifelines.iter().any(|l| l.role == role) {
                return Err(ParseError::DuplicateName { pos: start, what: "lifeline", name: role });
            }
            self.expect_sym(":")?;
            let class = ClassName::new(self.ident("class name")?);
            self.mark(NodeRef::Lifeline(lifelines.len()), start);
            lifelines.push(Lifeline { role, class });
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(";")?;
        let known = |role: &str| role == ENV || lifelines.iter().any(|l| l.role == role);
        let mut steps = Vec::new();
        while !self.eat_sym("}") {
            let start = self.start();
            let step = if self.eat_kw("state") {
                let pos = self.start();
                let role = self.role_name()?;
                if !known(&role) {
                    return Err(ParseError::UndeclaredName { pos, what: "lifeline", name: role });
                }
                self.expect_sym(":")?;
                SeqStep::Label { role, label: self.ident("state label")? }
            } else {
                let role = |p: &mut Self| {
                    let pos = p.start();
                    let r = p.role_name()?;
                    if known(&r) {
                        Ok(r)
                    } else {
                        Err(ParseError::UndeclaredName { pos, what: "lifeline", name: r })
                    }
                };
                let sender = role(self).map_err(|e| match e {
                    ParseError::Syntax { pos, found, .. } => ParseError::Syntax {
                        pos,
                        found,
                        expected: alloc::vec!["object name".into(), "`state`".into(), "`}`".into()],
                    },
                    e => e,
                })?;
                self.expect_sym("->")?;
                let receiver = role(self)?;
                self.expect_sym(":")?;
                let selector = self.ident("selector")?;
                let args = self.literal_list()?;
                SeqStep::Event(SeqEvent { sender, receiver, selector, args })
            };
            self.mark(NodeRef::SeqStep(steps.len()), start);
            steps.push(step);
        }
        Ok(SequenceDiagramBody { name, lifelines, steps })
    }

    // ---- object diagrams ----

    fn object_diagram(&mut self) -> Result<ObjectDiagramBody, ParseError> {
        let start = self.start();
        self.expect_kw("objects")?;
        self.mark(NodeRef::Header, start);
        self.expect_sym("{")?;
        let mut body = ObjectDiagramBody::default();
        // endpoints are resolved after the whole block is read
        let mut link_refs: Vec<(Pos, Pos)> = Vec::new();
        let mut owner_refs: Vec<Pos> = Vec::new();
        let mut ids = BTreeSet::new();
        while !self.eat_sym("}") {
            let start = self.start();
            if self.eat_kw("link") {
                let assoc = self.ident("association name")?;
                let spos = self.start();
                let source = ObjectId::new(self.role_name()?);
                self.expect_sym("->")?;
                let tpos = self.start();
                let target = ObjectId::new(self.role_name()?);
                self.mark(NodeRef::Link(body.links.len()), start);
                link_refs.push((spos, tpos));
                body.links.push(Link { assoc, source, target });
            } else if self.eat_kw("creatable") {
                let pos = self.start();
                let id = self.role_name()?;
                if !ids.insert(id.clone()) {
                    return Err(ParseError::DuplicateName { pos, what: "object", name: id });
                }
                self.expect_sym(":")?;
                let class = ClassName::new(self.ident("class name")?);
                self.expect_kw("by")?;
                owner_refs.push(self.start());
                let owner = ObjectId::new(self.role_name()?);
                self.mark(NodeRef::Creatable(body.creatables.len()), start);
                body.creatables.push(CreatableDecl { id: ObjectId::new(id), class, owner });
            } else {
                let idx = body.objects.len();
                let id = self.ident("object name, `link` or `creatable`").map_err(|_| {
                    self.unexpected(&["object name", "`link`", "`creatable`", "`}`"])
                })?;
                if !ids.insert(id.clone()) {
                    return Err(ParseError::DuplicateName { pos: start, what: "object", name: id });
                }
                self.expect_sym(":")?;
                let class = ClassName::new(self.ident("class name")?);
                let mut bindings: Vec<(String, Value)> = Vec::new();
                if self.eat_sym("{") {
                    let mut k = 0;
                    bindings = self.comma_separated("}", |p| {
                        let bstart = p.start();
                        let name = p.ident("attribute name")?;
                        p.expect_sym("=")?;
                        let v = p.literal()?;
                        p.mark(NodeRef::Binding(idx, k), bstart);
                        k += 1;
                        Ok((name, v))
                    })?;
                    let mut seen = BTreeSet::new();
                    for (k, (name, _)) in bindings.iter().enumerate() {
                        if !seen.insert(name) {
                            let pos = self.spans[&NodeRef::Binding(idx, k)].start;
                            return Err(ParseError::DuplicateName { pos, what: "binding", name: name.clone() });
                        }
                    }
                }
                self.mark(NodeRef::Object(idx), start);
                body.objects.push(ObjectDecl { id: ObjectId::new(id), class, bindings });
            }
        }
        let declared = |id: &ObjectId| body.objects.iter().any(|o| o.id == *id);
        for (link, (spos, tpos)) in body.links.iter().zip(&link_refs) {
            for (end, pos) in [(&link.source, spos), (&link.target, tpos)] {
                if !declared(end) {
                    return Err(ParseError::UndeclaredName { pos: *pos, what: "object", name: end.to_string() });
                }
            }
        }
        for (c, pos) in body.creatables.iter().zip(&owner_refs) {
            if !c.owner.is_env() && !declared(&c.owner) {
                return Err(ParseError::UndeclaredName { pos: *pos, what: "object", name: c.owner.to_string() });
            }
        }
        Ok(body)
    }
}

fn negate(n: u64) -> Option<i64> {
    if n == 1u64 << 63 {
        Some(i64::MIN)
    } else {
        i64::try_from(n).ok().map(|v| -v)
    }
}
