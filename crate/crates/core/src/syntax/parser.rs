use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    BodyLine, Decimal, IdentRole, Identifier, InstructionId, MoveKind, MovementInstruction, Offset, OffsetFunction,
    Routine, TargetExpr,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    /// 1-based line within the parsed text.
    pub line: usize,
    /// 1-based character column.
    pub column: usize,
    /// The grammar rule that could not be satisfied.
    pub rule: String,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: expected {}", self.line, self.column, self.rule)?;
        if !self.found.is_empty() {
            write!(f, ", found `{}`", self.found)?;
        }
        Ok(())
    }
}

fn err(line: usize, column: usize, rule: impl Into<String>, found: impl Into<String>) -> SyntaxError {
    SyntaxError { line, column, rule: rule.into(), found: found.into() }
}

/// A block of a module that could not be parsed as a movement routine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    /// Byte offset of the block in the original source.
    pub offset: usize,
    /// 1-based line of the block start.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModuleItem {
    Routine(Routine),
    Opaque(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceModule {
    pub items: Vec<ModuleItem>,
    pub warnings: Vec<Warning>,
}

impl SourceModule {
    pub fn routines(&self) -> impl Iterator<Item = &Routine> {
        self.items.iter().filter_map(|i| match i {
            ModuleItem::Routine(r) => Some(r),
            ModuleItem::Opaque(_) => None,
        })
    }

    pub fn non_movement_spans(&self) -> impl Iterator<Item = &str> {
        self.items.iter().filter_map(|i| match i {
            ModuleItem::Opaque(s) => Some(s.as_str()),
            ModuleItem::Routine(_) => None,
        })
    }

    pub fn into_routines(self) -> Vec<Routine> {
        self.items
            .into_iter()
            .filter_map(|i| match i {
                ModuleItem::Routine(r) => Some(r),
                ModuleItem::Opaque(_) => None,
            })
            .collect()
    }
}

/// Lines with their terminators removed and the byte offset of each start.
fn lines_with_offsets(source: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    source.split_inclusive('\n').map(move |raw| {
        let start = offset;
        offset += raw.len();
        let line = raw.strip_suffix('\n').unwrap_or(raw);
        let line = line.strip_suffix('\r').unwrap_or(line);
        (start, line)
    })
}

fn is_proc_start(line: &str) -> bool {
    let mut t = line.trim_start();
    if let Some(rest) = t.strip_prefix("LOCAL").filter(|r| r.starts_with(char::is_whitespace)) {
        t = rest.trim_start();
    }
    t.strip_prefix("PROC").is_some_and(|rest| rest.starts_with(char::is_whitespace))
}

fn is_proc_end(line: &str) -> bool {
    let t = line.trim();
    t.strip_prefix("ENDPROC").is_some_and(|rest| !rest.starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_'))
}

/// Splits a module into movement routines and opaque spans. Never fails.
pub fn parse_module(source_text: &str) -> SourceModule {
    let mut module = SourceModule::default();
    let mut loose: Vec<&str> = Vec::new();
    let mut block: Option<(usize, usize, Vec<&str>)> = None;

    fn flush_loose(module: &mut SourceModule, loose: &mut Vec<&str>) {
        if loose.iter().any(|l| !l.trim().is_empty()) {
            module.items.push(ModuleItem::Opaque(loose.join("\n")));
        }
        loose.clear();
    }

    for (line_no, (offset, line)) in lines_with_offsets(source_text).enumerate() {
        match &mut block {
            None if is_proc_start(line) => {
                flush_loose(&mut module, &mut loose);
                block = Some((offset, line_no + 1, vec![line]));
            }
            None => loose.push(line),
            Some((_, _, lines)) => {
                // A new PROC before ENDPROC: the open block is unterminated.
                if is_proc_start(line) {
                    let (offset0, line0, lines) = block.take().unwrap();
                    module.warnings.push(Warning {
                        offset: offset0,
                        line: line0,
                        reason: "PROC block without ENDPROC".into(),
                    });
                    module.items.push(ModuleItem::Opaque(lines.join("\n")));
                    block = Some((offset, line_no + 1, vec![line]));
                    continue;
                }
                lines.push(line);
                if is_proc_end(line) {
                    let (offset0, line0, lines) = block.take().unwrap();
                    let text = lines.join("\n");
                    match parse_routine(&text) {
                        Ok(r) if !r.has_statements() => module.items.push(ModuleItem::Routine(r)),
                        Ok(_) => {
                            module.warnings.push(Warning {
                                offset: offset0,
                                line: line0,
                                reason: "routine contains non-movement statements".into(),
                            });
                            module.items.push(ModuleItem::Opaque(text));
                        }
                        Err(e) => {
                            module.warnings.push(Warning { offset: offset0, line: line0, reason: e.to_string() });
                            module.items.push(ModuleItem::Opaque(text));
                        }
                    }
                }
            }
        }
    }
    if let Some((offset, line, lines)) = block {
        module.warnings.push(Warning { offset, line, reason: "PROC block without ENDPROC".into() });
        module.items.push(ModuleItem::Opaque(lines.join("\n")));
    }
    flush_loose(&mut module, &mut loose);
    module
}

/// Parses a single `PROC ... ENDPROC` block.
///
/// Accepts movement instructions, comments and foreign statements (kept
/// verbatim); at least two movement instructions are required.
pub fn parse_routine(text: &str) -> Result<Routine, SyntaxError> {
    let mut lines = lines_with_offsets(text).map(|(_, l)| l).enumerate().map(|(i, l)| (i + 1, l));

    let (header_line, header) = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some(found) => break found,
            None => return Err(err(1, 1, "PROC header", "end of input")),
        }
    };
    let (local, name) = parse_header(header_line, header)?;

    let mut from_comment = None;
    let mut to_comment = None;
    let mut instructions: Vec<MovementInstruction> = Vec::new();
    let mut pending: Vec<BodyLine> = Vec::new();
    let mut closed_at = None;

    for (line_no, line) in lines.by_ref() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if is_proc_end(line) {
            closed_at = Some(line_no);
            let col = line.find("ENDPROC").unwrap() + "ENDPROC".len();
            let rest = line[col..].trim();
            if !rest.is_empty() {
                return Err(err(line_no, col + 1, "end of line after ENDPROC", rest));
            }
            break;
        }
        if let Some(comment) = trimmed.strip_prefix('!') {
            let header_slot = instructions.is_empty() && pending.is_empty();
            if header_slot && from_comment.is_none() {
                if let Some(v) = comment.trim_start().strip_prefix("From:") {
                    from_comment = Some(v.trim().to_string());
                    continue;
                }
            }
            if header_slot && to_comment.is_none() {
                if let Some(v) = comment.trim_start().strip_prefix("To:") {
                    to_comment = Some(v.trim().to_string());
                    continue;
                }
            }
            pending.push(BodyLine::Comment(comment.trim_end().to_string()));
            continue;
        }
        let first_word = trimmed.split(|c: char| c.is_whitespace() || c == ';').next().unwrap_or("");
        if let Some(kind) = MoveKind::from_keyword(first_word) {
            let indent = line.len() - line.trim_start().len();
            let mut instr = parse_instruction(kind, line_no, indent, trimmed)?;
            instr.leading = std::mem::take(&mut pending);
            instructions.push(instr);
        } else {
            pending.push(BodyLine::Statement(trimmed.to_string()));
        }
    }

    let Some(end_line) = closed_at else {
        return Err(err(header_line, 1, "ENDPROC", "end of input"));
    };
    if let Some((line_no, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(err(line_no, 1, "end of input after ENDPROC", l.trim()));
    }
    if instructions.len() < 2 {
        return Err(err(
            end_line,
            1,
            "at least two movement instructions in a movement routine",
            format!("{} instruction(s)", instructions.len()),
        ));
    }

    Ok(Routine { local, name, from_comment, to_comment, instructions, trailing: pending, raw_text: text.to_string() })
}

fn parse_header(line_no: usize, line: &str) -> Result<(bool, Identifier), SyntaxError> {
    let toks = tokenize(line_no, 0, line)?;
    let mut it = toks.iter().peekable();
    let mut local = false;
    if let Some(Tok { kind: TokKind::Ident(w), .. }) = it.peek() {
        if w == "LOCAL" {
            local = true;
            it.next();
        }
    }
    match it.next() {
        Some(Tok { kind: TokKind::Ident(w), .. }) if w == "PROC" => {}
        other => return Err(unexpected(line_no, line, other, "PROC header")),
    }
    let name = match it.next() {
        Some(Tok { kind: TokKind::Ident(w), .. }) => Identifier::new(IdentRole::RoutineName, w.clone())
            .map_err(|_| err(line_no, 1, "routine name", w.clone()))?,
        other => return Err(unexpected(line_no, line, other, "routine name")),
    };
    match it.next() {
        Some(Tok { kind: TokKind::LParen, .. }) => {}
        other => return Err(unexpected(line_no, line, other, "`(` after routine name")),
    }
    match it.next() {
        Some(Tok { kind: TokKind::RParen, .. }) => {}
        other => return Err(unexpected(line_no, line, other, "`)` (parameterless routine)")),
    }
    if let Some(t) = it.next() {
        return Err(err(line_no, t.column, "end of header line", t.kind.to_string()));
    }
    Ok((local, name))
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Ident(String),
    Number(String),
    Comma,
    LParen,
    RParen,
    Backslash,
    Assign,
    Semi,
}

impl fmt::Display for TokKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokKind::Ident(s) | TokKind::Number(s) => f.write_str(s),
            TokKind::Comma => f.write_str(","),
            TokKind::LParen => f.write_str("("),
            TokKind::RParen => f.write_str(")"),
            TokKind::Backslash => f.write_str("\\"),
            TokKind::Assign => f.write_str(":="),
            TokKind::Semi => f.write_str(";"),
        }
    }
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    column: usize,
}

fn tokenize(line_no: usize, col_base: usize, text: &str) -> Result<Vec<Tok>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = col_base + i + 1;
        let single = match c {
            ',' => Some(TokKind::Comma),
            '(' => Some(TokKind::LParen),
            ')' => Some(TokKind::RParen),
            '\\' => Some(TokKind::Backslash),
            ';' => Some(TokKind::Semi),
            _ => None,
        };
        if let Some(kind) = single {
            out.push(Tok { kind, column });
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == ':' && chars.get(i + 1) == Some(&'=') {
            out.push(Tok { kind: TokKind::Assign, column });
            i += 2;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok { kind: TokKind::Ident(chars[start..i].iter().collect()), column });
        } else if c.is_ascii_digit() || ((c == '-' || c == '+') && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(char::is_ascii_digit) {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if chars.get(i).is_some_and(|c| c.is_ascii_alphabetic() || *c == '_') {
                return Err(err(line_no, col_base + i + 1, "separator after number", chars[i].to_string()));
            }
            out.push(Tok { kind: TokKind::Number(chars[start..i].iter().collect()), column });
        } else {
            return Err(err(line_no, column, "identifier, number or punctuation", c.to_string()));
        }
    }
    Ok(out)
}

fn unexpected(line_no: usize, line: &str, tok: Option<&Tok>, rule: &str) -> SyntaxError {
    match tok {
        Some(t) => err(line_no, t.column, rule, t.kind.to_string()),
        None => err(line_no, line.chars().count() + 1, rule, "end of line"),
    }
}

enum Arg {
    Word(String, usize),
    Number(String, usize),
    Call { function: OffsetFunction, position: Identifier, offset: Offset },
}

struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
    line_no: usize,
    line: &'a str,
    col_base: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn fail(&self, tok: Option<&Tok>, rule: &str) -> SyntaxError {
        match tok {
            Some(t) => err(self.line_no, t.column, rule, t.kind.to_string()),
            None => err(self.line_no, self.col_base + self.line.chars().count() + 1, rule, "end of line"),
        }
    }

    fn expect(&mut self, kind: TokKind, rule: &str) -> Result<(), SyntaxError> {
        match self.next() {
            Some(t) if t.kind == kind => Ok(()),
            other => Err(self.fail(other, rule)),
        }
    }

    fn number(&mut self, rule: &str) -> Result<Decimal, SyntaxError> {
        match self.next() {
            Some(Tok { kind: TokKind::Number(n), .. }) => {
                Ok(n.parse().expect("lexer only yields well-formed decimals"))
            }
            other => Err(self.fail(other, rule)),
        }
    }
}

fn parse_instruction(
    kind: MoveKind,
    line_no: usize,
    indent: usize,
    text: &str,
) -> Result<MovementInstruction, SyntaxError> {
    let toks = tokenize(line_no, indent, text)?;
    let mut cur = Cursor { toks: &toks, pos: 1, line_no, line: text, col_base: indent };

    let mut args = Vec::new();
    loop {
        args.push(parse_arg(&mut cur)?);
        match cur.peek() {
            Some(Tok { kind: TokKind::Comma, .. }) => {
                cur.next();
            }
            _ => break,
        }
    }

    let mut work_object = None;
    let mut no_move = false;
    while let Some(Tok { kind: TokKind::Backslash, .. }) = cur.peek() {
        cur.next();
        match cur.next() {
            Some(Tok { kind: TokKind::Ident(w), .. }) if w == "WObj" && work_object.is_none() && !no_move => {
                cur.expect(TokKind::Assign, "`:=` after \\WObj")?;
                match cur.next() {
                    Some(Tok { kind: TokKind::Ident(w), column }) => {
                        work_object = Some(ident(IdentRole::WorkObject, w, line_no, *column)?);
                    }
                    other => return Err(cur.fail(other, "work object identifier")),
                }
            }
            Some(Tok { kind: TokKind::Ident(w), .. }) if w == "NoMove" && !no_move => no_move = true,
            other => return Err(cur.fail(other, "optional argument \\WObj:=<wobj> followed by \\NoMove")),
        }
    }
    cur.expect(TokKind::Semi, "`;` terminating the instruction")?;
    if let Some(t) = cur.next() {
        return Err(cur.fail(Some(t), "end of line after `;`"));
    }

    let (id_arg, rest) = match args.len() {
        5 => {
            let mut it = args.into_iter();
            let first = it.next();
            (first, it.collect::<Vec<_>>())
        }
        4 => (None, args),
        n => return Err(err(line_no, indent + 1, "[ID,] TARGET, VELOCITY, ZONE, TOOL", format!("{n} argument(s)"))),
    };
    if kind.is_machine_tending() && id_arg.is_none() {
        return Err(err(line_no, indent + 1, "Machine-Tending id as first argument", kind.keyword()));
    }

    let id = match id_arg {
        None => None,
        Some(Arg::Number(n, column)) => {
            if n.bytes().all(|b| b.is_ascii_digit()) {
                Some(InstructionId::Number(n))
            } else {
                return Err(err(line_no, column, "unsigned integer id", n));
            }
        }
        Some(Arg::Word(w, column)) => Some(InstructionId::Name(ident(IdentRole::InstructionId, &w, line_no, column)?)),
        Some(Arg::Call { .. }) => return Err(err(line_no, indent + 1, "instruction id", "offset call")),
    };

    let mut rest = rest.into_iter();
    let target = match rest.next().unwrap() {
        Arg::Word(w, column) => TargetExpr::Direct(ident(IdentRole::Position, &w, line_no, column)?),
        Arg::Call { function, position, offset } => TargetExpr::OffsetCall { function, position, offset },
        Arg::Number(n, column) => return Err(err(line_no, column, "target position", n)),
    };
    let mut slot = |role: IdentRole, rule: &str| match rest.next().unwrap() {
        Arg::Word(w, column) => ident(role, &w, line_no, column),
        Arg::Number(n, column) => Err(err(line_no, column, rule, n)),
        Arg::Call { .. } => Err(err(line_no, indent + 1, rule, "function call")),
    };
    let velocity = slot(IdentRole::Velocity, "velocity identifier")?;
    let zone = slot(IdentRole::Zone, "zone identifier")?;
    let tool = slot(IdentRole::Tool, "tool identifier")?;

    Ok(MovementInstruction { kind, id, target, velocity, zone, tool, work_object, no_move, leading: Vec::new() })
}

fn ident(role: IdentRole, text: &str, line_no: usize, column: usize) -> Result<Identifier, SyntaxError> {
    Identifier::new(role, text).map_err(|_| err(line_no, column, format!("{role} identifier"), text))
}

fn parse_arg(cur: &mut Cursor<'_>) -> Result<Arg, SyntaxError> {
    match cur.next() {
        Some(Tok { kind: TokKind::Ident(w), column }) => {
            if let Some(Tok { kind: TokKind::LParen, .. }) = cur.peek() {
                let function = match w.as_str() {
                    "Offs" => OffsetFunction::Offs,
                    "RelTool" => OffsetFunction::RelTool,
                    _ => return Err(err(cur.line_no, *column, "offset function Offs or RelTool", w.clone())),
                };
                cur.next();
                let position = match cur.next() {
                    Some(Tok { kind: TokKind::Ident(p), column }) => {
                        ident(IdentRole::Position, p, cur.line_no, *column)?
                    }
                    other => return Err(cur.fail(other, "position inside offset call")),
                };
                cur.expect(TokKind::Comma, "`,` after offset position")?;
                let dx = cur.number("x offset")?;
                cur.expect(TokKind::Comma, "`,` after x offset")?;
                let dy = cur.number("y offset")?;
                cur.expect(TokKind::Comma, "`,` after y offset")?;
                let dz = cur.number("z offset")?;
                cur.expect(TokKind::RParen, "`)` closing offset call")?;
                Ok(Arg::Call { function, position, offset: Offset { dx, dy, dz } })
            } else {
                Ok(Arg::Word(w.clone(), *column))
            }
        }
        Some(Tok { kind: TokKind::Number(n), column }) => Ok(Arg::Number(n.clone(), *column)),
        other => Err(cur.fail(other, "instruction argument")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTING_1: &str = "PROC mvid1_id2()
    !From:  Start Position
    !To:    End Position
    MoveJ id1,position1,velocity,zone,tool\\WObj:=world_object\\NoMove;
    MoveJ id2,position2,velocity,zone,tool\\WObj:=world_object;
ENDPROC";

    const LISTING_2: &str = "PROC special_case_routine()
    MoveJ Offs(position1,0,0,100), velocity, zone, tool;
    MoveL position1, velocity, zone, tool;
    Stop;
    MoveL Offs(position1,0,0,50), velocity, zone, tool;
    MoveJ Offs(position2,0,0,50), velocity, zone, tool;
    MoveL position2, velocity, zone, tool;
    Stop;
    MoveL Offs(position2,0,0,50), velocity, zone, tool;
    MoveJ Offs(position3,0,0,50), velocity, zone, tool;
    MoveL position3, velocity, zone, tool;
    Stop;
    MoveL Offs(position3,0,0,50), velocity, zone, tool;
    MoveJ Offs(position4,0,0,50), velocity, zone, tool;
    MoveL position4, velocity, zone, tool;
ENDPROC";

    #[test]
    fn listing_one() {
        let r = parse_routine(LISTING_1).unwrap();
        assert_eq!(r.name.as_str(), "mvid1_id2");
        assert_eq!(r.from_comment.as_deref(), Some("Start Position"));
        assert_eq!(r.to_comment.as_deref(), Some("End Position"));
        assert_eq!(r.instructions.len(), 2);
        let first = &r.instructions[0];
        assert!(first.no_move);
        assert_eq!(first.id.as_ref().unwrap().as_str(), "id1");
        assert_eq!(first.work_object.as_ref().unwrap().as_str(), "world_object");
        assert!(!r.instructions[1].no_move);
        assert_eq!((r.source_id(), r.destination_id()), ("id1", "id2"));
        assert!(r.is_simple());
    }

    #[test]
    fn machine_tending_numeric_id() {
        let text = "PROC mv400_410()\n!From: a\n!To: b\nMT_MoveJ 400, pR7_400,vR7_rapid,z50,toR7_active\\WObj:=woR7_Base;\nMT_MoveL 410,pR7_410,vR7_rapid,z50,toR7_active\\WObj:=woR7_Base;\nENDPROC";
        let r = parse_routine(text).unwrap();
        let i = &r.instructions[0];
        assert_eq!(i.kind, MoveKind::MtMoveJ);
        assert_eq!(i.id, Some(InstructionId::Number("400".into())));
        assert_eq!(i.target.position().as_str(), "pR7_400");
    }

    #[test]
    fn machine_tending_requires_id() {
        let text = "PROC mv1_2()\nMT_MoveJ pR7_400,vR7_rapid,z50,toR7_active;\nMoveJ pR7_2,v,z,t;\nENDPROC";
        let e = parse_routine(text).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.rule.contains("Machine-Tending"), "{e}");
    }

    #[test]
    fn offset_calls_keep_decimal_text() {
        let text = "PROC mva_b()\nMoveJ RelTool(p1,0,-200.50,+3),v,z,t;\nMoveL Offs(p2,0,0,100),v,z,t;\nENDPROC";
        let r = parse_routine(text).unwrap();
        match &r.instructions[0].target {
            TargetExpr::OffsetCall { function, offset, .. } => {
                assert_eq!(*function, OffsetFunction::RelTool);
                assert_eq!(offset.dy.as_str(), "-200.50");
                assert_eq!(offset.dz.as_str(), "+3");
            }
            t => panic!("{t:?}"),
        }
        assert_eq!(r.instructions[1].target.function(), Some(OffsetFunction::Offs));
    }

    #[test]
    fn zero_instructions_is_an_error() {
        let e = parse_routine("PROC mv1_2()\n  !From: a\n  !To: b\nENDPROC").unwrap_err();
        assert!(e.rule.contains("at least two"));
        assert_eq!(e.line, 4);
    }

    #[test]
    fn stray_equals_is_rejected() {
        let text = "PROC mvid1_id2()\nMoveJ id1,position1,v,z,t\\NoMove;\nMoveJ id_intermediate,RelTool(position1,0,100,0=),v,z,t;\nENDPROC";
        let e = parse_routine(text).unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(e.found, "=");
    }

    #[test]
    fn nomove_before_wobj_is_rejected() {
        let text = "PROC mva_b()\nMoveJ p1,v,z,t\\NoMove\\WObj:=wo;\nMoveJ p2,v,z,t;\nENDPROC";
        assert!(parse_routine(text).is_err());
    }

    #[test]
    fn wrong_argument_count() {
        let e = parse_routine("PROC mva_b()\nMoveJ p1,v,z;\nMoveJ p2,v,z,t;\nENDPROC").unwrap_err();
        assert_eq!(e.found, "3 argument(s)");
    }

    #[test]
    fn complex_routine_parses_with_statements() {
        let r = parse_routine(LISTING_2).unwrap();
        assert_eq!(r.instructions.len(), 11);
        assert!(r.has_statements());
        assert!(!r.is_simple());
    }

    #[test]
    fn crlf_input() {
        let r = parse_routine(&LISTING_1.replace('\n', "\r\n")).unwrap();
        assert_eq!(r.instructions.len(), 2);
    }

    #[test]
    fn comments_attach_to_following_instruction() {
        let text =
            "PROC mva_b()\n!From: A\n!To: B\n! approach\nMoveJ p1,v,z,t\\NoMove;\nMoveJ p2,v,z,t;\n! done\nENDPROC";
        let r = parse_routine(text).unwrap();
        assert_eq!(r.instructions[0].leading, vec![BodyLine::Comment(" approach".into())]);
        assert_eq!(r.trailing, vec![BodyLine::Comment(" done".into())]);
    }

    #[test]
    fn module_separates_routines_and_spans() {
        let src = format!("MODULE Moves\n  VAR num x := 1;\n{LISTING_1}\n\n{LISTING_2}\nPROC helper()\n  x := 2;\nENDPROC\nENDMODULE\n");
        let m = parse_module(&src);
        assert_eq!(m.routines().count(), 1);
        let spans: Vec<_> = m.non_movement_spans().collect();
        assert_eq!(spans.len(), 4);
        assert!(spans[1].starts_with("PROC special_case_routine"));
        assert_eq!(m.warnings.len(), 2);
        assert_eq!(m.warnings[0].line, 10);
    }

    #[test]
    fn empty_module() {
        let m = parse_module("");
        assert!(m.items.is_empty());
        assert!(m.warnings.is_empty());
    }

    #[test]
    fn unterminated_block_degrades() {
        let m = parse_module("PROC mva_b()\nMoveJ p1,v,z,t;\n");
        assert_eq!(m.routines().count(), 0);
        assert_eq!(m.warnings.len(), 1);
        assert_eq!(m.non_movement_spans().count(), 1);
    }
}
