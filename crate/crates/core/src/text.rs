//! Structured-text form of programs (`.prog` files).
//!
//! ```text
//! post_state=pre_state;
//! for(z1=0;z1<|Ω|;z1++){
//!   if(z1<z2){
//!     post_state(z1)=pre_state(z2);
//!     post_state(z2)=pre_state(z1);
//!     dec(z2);
//!   }
//! }
//! return post_state;
//! ```
//!
//! State registers are written `pre_state(pred,z1,...)`, or `pre_state(z1)`
//! when the signature has a single unary state variable, or `pre_state[i]`
//! for a fixed register index.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::Error;
use crate::machine::{Address, Atom, Instruction, LanguageId, LatentId, ModelSignature, Reg, StateVar, MAX_ARITY};
use crate::program::{Condition, Production, Program, LOOP_EXIT};

const INDENT: &str = "  ";

/// Renders a closed, well-structured, terminating program.
pub fn to_structured_text(p: &Program, sig: &ModelSignature) -> Result<String, Error> {
    if !p.is_closed() {
        return Err(Error::Incomplete);
    }
    let lines = p.lines();
    let mut loop_end = BTreeMap::new();
    for (j, l) in lines.iter().enumerate() {
        if let Instruction::Jmp(jump) = l {
            if jump.target <= j {
                if jump.target == 0 || jump.guard != LOOP_EXIT {
                    return Err(Error::MalformedProgram(format!("line {j}: backward jump is not a loop")));
                }
                loop_end.insert(jump.target - 1, j);
            }
        }
    }
    let mut out = String::from("post_state=pre_state;\n");
    Printer { lines, sig, loop_end, out: &mut out }.block(0, lines.len(), 0)?;
    out.push_str("return post_state;\n");
    Ok(out)
}

struct Printer<'a> {
    lines: &'a [Instruction],
    sig: &'a ModelSignature,
    loop_end: BTreeMap<usize, usize>,
    out: &'a mut String,
}

impl Printer<'_> {
    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str(INDENT);
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn block(&mut self, start: usize, end: usize, depth: usize) -> Result<(), Error> {
        let mut i = start;
        while i < end {
            let instr = self.lines[i];
            let next = self.lines.get(i + 1).and_then(Instruction::jump).copied();
            match instr {
                Instruction::Test(_) | Instruction::Cmp(..) => {
                    let jump = next
                        .filter(|j| j.target > i + 1 && j.target <= end)
                        .ok_or_else(|| Error::MalformedProgram(format!("line {i}: comparison without an if")))?;
                    let cond = Condition::recover(&instr, jump.guard)
                        .ok_or_else(|| Error::MalformedProgram(format!("line {}: unknown jump guard", i + 1)))?;
                    let text = format!("if({}){{", self.condition(&cond));
                    self.line(depth, &text);
                    self.block(i + 2, jump.target, depth + 1)?;
                    self.line(depth, "}");
                    i = jump.target;
                }
                Instruction::SetConst(Reg::Latent(z), false) if self.loop_end.contains_key(&i) => {
                    let j = self.loop_end[&i];
                    if j > end || self.lines[j - 1] != Instruction::Inc(Reg::Latent(z)) {
                        return Err(Error::MalformedProgram(format!("line {i}: loop is not a for")));
                    }
                    let text = format!("for({z}=0;{z}<|Ω|;{z}++){{");
                    self.line(depth, &text);
                    self.block(i + 1, j - 1, depth + 1)?;
                    self.line(depth, "}");
                    i = j + 1;
                }
                Instruction::Jmp(_) => {
                    return Err(Error::MalformedProgram(format!("line {i}: jump without a condition")));
                }
                _ => {
                    let text = self.statement(&instr);
                    self.line(depth, &text);
                    i += 1;
                }
            }
        }
        Ok(())
    }

    fn reg(&self, r: &Reg) -> String {
        reg_text(r, self.sig)
    }

    fn is_boolean(&self, r: &Reg) -> bool {
        match r {
            Reg::Pre(Address::Indirect(a)) | Reg::Post(Address::Indirect(a)) => self.sig.is_boolean_atom(a),
            Reg::Pre(Address::Direct(i)) | Reg::Post(Address::Direct(i)) => self.sig.domain_of_index(*i) == Some((0, 1)),
            Reg::Latent(_) => false,
        }
    }

    fn condition(&self, c: &Condition) -> String {
        match c {
            Condition::IsZero(r) => format!("{}==0", self.reg(r)),
            Condition::IsPositive(r) if self.is_boolean(r) => format!("{}==1", self.reg(r)),
            Condition::IsPositive(r) => format!("{}>0", self.reg(r)),
            Condition::Equal(a, b) => format!("{}=={}", self.reg(a), self.reg(b)),
            Condition::Greater(a, b) => format!("{}>{}", self.reg(a), self.reg(b)),
            Condition::Less(a, b) => format!("{}<{}", self.reg(a), self.reg(b)),
        }
    }

    fn statement(&self, instr: &Instruction) -> String {
        match instr {
            Instruction::Inc(r) => format!("inc({});", self.reg(r)),
            Instruction::Dec(r) => format!("dec({});", self.reg(r)),
            Instruction::SetConst(r, bit) => format!("{}={};", self.reg(r), u8::from(*bit)),
            Instruction::SetReg(d, s) => format!("{}={};", self.reg(d), self.reg(s)),
            Instruction::Halt => "halt();".to_string(),
            Instruction::Test(_) | Instruction::Cmp(..) | Instruction::Jmp(_) => unreachable!("control flow"),
        }
    }
}

fn reg_text(r: &Reg, sig: &ModelSignature) -> String {
    let (bank, addr) = match r {
        Reg::Latent(z) => return z.to_string(),
        Reg::Pre(a) => ("pre_state", a),
        Reg::Post(a) => ("post_state", a),
    };
    match addr {
        Address::Direct(i) => format!("{bank}[{i}]"),
        Address::Indirect(a) => {
            let vars = sig.state_vars();
            let mut parts: Vec<String> = Vec::new();
            let shorthand = vars.len() == 1 && vars[0].arity == 1;
            if !shorthand {
                parts.push(vars.get(a.pred as usize).map_or_else(|| format!("p{}", a.pred), |v| v.name.clone()));
            }
            parts.extend(a.args().map(|z| z.to_string()));
            format!("{bank}({})", parts.join(","))
        }
    }
}

/// Parses structured text against `sig`.
pub fn parse_structured_text(text: &str, sig: &ModelSignature) -> Result<Program, Error> {
    Parser::new(text, Names::Fixed(sig)).program()
}

/// Parses structured text and infers a signature from the state variables
/// it mentions: predicates in order of appearance, one object, Boolean
/// unless compared with `>0`.
pub fn parse_with_inferred_signature(text: &str) -> Result<(Program, ModelSignature), Error> {
    let mut parser = Parser::new(text, Names::Inferred(Vec::new()));
    let program = parser.program()?;
    let Names::Inferred(preds) = parser.names else { unreachable!() };
    let vars: Vec<StateVar> = preds
        .into_iter()
        .map(|p| if p.boolean { StateVar::boolean(p.name, p.arity) } else { StateVar::new(p.name, p.arity, (0, i32::MAX)) })
        .collect();
    let latent = crate::validate::latent_needed(&program);
    let sig = ModelSignature::new(1, vars, latent, LanguageId::GeneralRam)?;
    Ok((program, sig))
}

struct InferredPred {
    name: String,
    arity: u8,
    boolean: bool,
}

enum Names<'a> {
    Fixed(&'a ModelSignature),
    Inferred(Vec<InferredPred>),
}

const SHORTHAND: &str = "";

struct Parser<'t, 's> {
    src: &'t str,
    pos: usize,
    names: Names<'s>,
    program: Program,
}

impl<'t, 's> Parser<'t, 's> {
    fn new(src: &'t str, names: Names<'s>) -> Self {
        Parser { src, pos: 0, names, program: Program::new(usize::MAX / 4) }
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        let before = &self.src[..self.pos];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Error::Syntax { line, col, msg: msg.into() }
    }

    fn rest(&self) -> &'t str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        loop {
            let rest = self.rest();
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with("//") {
                self.pos += trimmed.find('\n').unwrap_or(trimmed.len());
            } else {
                break;
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.rest().is_empty()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), Error> {
        if self.eat(token) {
            Ok(())
        } else if self.at_end() {
            Err(self.error(format!("expected `{token}`, found end of input")))
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    fn word(&mut self) -> Option<&'t str> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|(_, c)| !(c.is_alphanumeric() || *c == '_' || *c == '-'))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            return None;
        }
        self.pos += len;
        Some(&rest[..len])
    }

    fn peek_word(&mut self) -> Option<&'t str> {
        let save = self.pos;
        let w = self.word();
        self.pos = save;
        w
    }

    fn number(&mut self) -> Result<usize, Error> {
        self.skip_ws();
        let digits = self.rest().chars().take_while(char::is_ascii_digit).count();
        if digits == 0 {
            return Err(self.error("expected a number"));
        }
        let n = self.rest()[..digits].parse().map_err(|_| self.error("number too large"))?;
        self.pos += digits;
        Ok(n)
    }

    fn latent_name(w: &str) -> Option<LatentId> {
        let n: usize = w.strip_prefix('z')?.parse().ok()?;
        (1..=256).contains(&n).then(|| LatentId((n - 1) as u8))
    }

    fn latent(&mut self) -> Result<LatentId, Error> {
        let start = self.pos;
        match self.word().and_then(Self::latent_name) {
            Some(z) => Ok(z),
            None => {
                self.pos = start;
                Err(self.error("expected a latent register"))
            }
        }
    }

    fn apply(&mut self, prod: Production) -> Result<(), Error> {
        self.program.apply_mut(&prod).map_err(|e| self.error(e.to_string()))
    }

    fn close(&mut self) -> Result<(), Error> {
        self.program.close_innermost().map_err(|e| self.error(e.to_string()))
    }

    fn program(&mut self) -> Result<Program, Error> {
        self.expect("post_state")?;
        self.expect("=")?;
        self.expect("pre_state")?;
        self.expect(";")?;
        loop {
            if self.at_end() {
                return Err(Error::Incomplete);
            }
            if self.peek_word() == Some("return") {
                self.word();
                self.expect("post_state")?;
                self.expect(";")?;
                if !self.at_end() {
                    return Err(self.error("text after `return post_state;`"));
                }
                let lines = self.program.lines().to_vec();
                return Program::from_lines(lines.len(), lines);
            }
            self.statement()?;
        }
    }

    fn body(&mut self) -> Result<(), Error> {
        self.expect("{")?;
        loop {
            if self.at_end() {
                return Err(self.error("unclosed `{`"));
            }
            if self.eat("}") {
                return Ok(());
            }
            self.statement()?;
        }
    }

    fn statement(&mut self) -> Result<(), Error> {
        let start = self.pos;
        match self.word() {
            Some("if") => {
                self.expect("(")?;
                let cond = self.condition()?;
                self.expect(")")?;
                self.apply(Production::OpenIf(cond))?;
                self.body()?;
                self.close()
            }
            Some("for") => {
                self.expect("(")?;
                let z = self.latent()?;
                self.expect("=")?;
                self.expect("0")?;
                self.expect(";")?;
                if self.latent()? != z {
                    return Err(self.error("loop bound must test the loop variable"));
                }
                self.expect("<")?;
                if !(self.eat("|Ω|") || self.eat("|O|")) {
                    return Err(self.error("expected `|Ω|`"));
                }
                self.expect(";")?;
                if self.latent()? != z {
                    return Err(self.error("loop step must increment the loop variable"));
                }
                self.expect("++")?;
                self.expect(")")?;
                self.apply(Production::OpenFor(z))?;
                self.body()?;
                self.close()
            }
            Some(op @ ("inc" | "dec")) => {
                self.expect("(")?;
                let r = self.reg()?;
                self.expect(")")?;
                self.expect(";")?;
                let instr = if op == "inc" { Instruction::Inc(r) } else { Instruction::Dec(r) };
                self.apply(Production::Emit(instr))
            }
            Some("halt") => {
                self.expect("(")?;
                self.expect(")")?;
                self.expect(";")?;
                self.apply(Production::Emit(Instruction::Halt))
            }
            _ => {
                self.pos = start;
                let dst = self.reg()?;
                self.expect("=")?;
                self.skip_ws();
                let instr = if self.rest().starts_with(|c: char| c.is_ascii_digit()) {
                    match self.number()? {
                        0 => Instruction::SetConst(dst, false),
                        1 => Instruction::SetConst(dst, true),
                        _ => return Err(self.error("only the constants 0 and 1 can be assigned")),
                    }
                } else {
                    Instruction::SetReg(dst, self.reg()?)
                };
                self.expect(";")?;
                self.apply(Production::Emit(instr))
            }
        }
    }

    fn condition(&mut self) -> Result<Condition, Error> {
        let a = self.reg()?;
        let op = if self.eat("==") {
            "=="
        } else if self.eat(">") {
            ">"
        } else if self.eat("<") {
            "<"
        } else {
            return Err(self.error("expected `==`, `>` or `<`"));
        };
        self.skip_ws();
        if self.rest().starts_with(|c: char| c.is_ascii_digit()) {
            let k = self.number()?;
            return match (op, k) {
                ("==", 0) => Ok(Condition::IsZero(a)),
                ("==", 1) => {
                    self.mark_boolean(&a, true);
                    Ok(Condition::IsPositive(a))
                }
                (">", 0) => {
                    self.mark_boolean(&a, false);
                    Ok(Condition::IsPositive(a))
                }
                _ => Err(self.error("conditions against constants are `==0`, `==1` or `>0`")),
            };
        }
        let b = self.reg()?;
        Ok(match op {
            "==" => Condition::Equal(a, b),
            ">" => Condition::Greater(a, b),
            _ => Condition::Less(a, b),
        })
    }

    fn mark_boolean(&mut self, r: &Reg, boolean: bool) {
        if let (Names::Inferred(preds), Some(a)) = (&mut self.names, r.atom()) {
            if !boolean {
                preds[a.pred as usize].boolean = false;
            }
        }
    }

    fn reg(&mut self) -> Result<Reg, Error> {
        let start = self.pos;
        let bank = match self.word() {
            Some("pre_state") => true,
            Some("post_state") => false,
            Some(w) => {
                if let Some(z) = Self::latent_name(w) {
                    return Ok(Reg::Latent(z));
                }
                self.pos = start;
                return Err(self.error(format!("unknown register `{w}`")));
            }
            None => return Err(self.error("expected a register")),
        };
        let addr = if self.eat("[") {
            let i = self.number()?;
            self.expect("]")?;
            Address::Direct(i)
        } else {
            self.expect("(")?;
            let mut name = None;
            let mut args = Vec::new();
            loop {
                let at = self.pos;
                let w = self.word().ok_or_else(|| self.error("expected a predicate or latent register"))?;
                match Self::latent_name(w) {
                    Some(z) => args.push(z),
                    None if name.is_none() && args.is_empty() => name = Some(w),
                    None => {
                        self.pos = at;
                        return Err(self.error(format!("`{w}` is not a latent register")));
                    }
                }
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
            if args.len() > MAX_ARITY {
                return Err(self.error("too many arguments"));
            }
            let pred = self.predicate(name.unwrap_or(SHORTHAND), args.len())?;
            Address::Indirect(Atom::new(pred, &args))
        };
        Ok(if bank { Reg::Pre(addr) } else { Reg::Post(addr) })
    }

    fn predicate(&mut self, name: &str, arity: usize) -> Result<u16, Error> {
        let err = |p: &Self, msg: String| p.error(msg);
        match &mut self.names {
            Names::Fixed(sig) => {
                let vars = sig.state_vars();
                let index = if name == SHORTHAND {
                    (vars.len() == 1 && vars[0].arity == 1).then_some(0)
                } else {
                    sig.pred_index(name)
                };
                let Some(index) = index else {
                    let shown = if name.is_empty() { "(unnamed)" } else { name };
                    return Err(err(self, format!("unknown state variable `{shown}`")));
                };
                if vars[index as usize].arity as usize != arity {
                    return Err(err(self, format!("`{}` takes {} arguments", vars[index as usize].name, vars[index as usize].arity)));
                }
                Ok(index)
            }
            Names::Inferred(preds) => {
                let name = if name == SHORTHAND { "f" } else { name };
                if let Some(i) = preds.iter().position(|p| p.name == name) {
                    if preds[i].arity as usize != arity {
                        return Err(err(self, format!("`{name}` used with different arities")));
                    }
                    return Ok(i as u16);
                }
                preds.push(InferredPred { name: name.to_string(), arity: arity as u8, boolean: true });
                Ok((preds.len() - 1) as u16)
            }
        }
    }
}
