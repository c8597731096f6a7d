use std::fmt::Write;

use super::{BodyLine, ModuleItem, MovementInstruction, Routine, SourceModule, TargetExpr};

const INDENT: &str = "    ";

pub fn print_target(target: &TargetExpr) -> String {
    match target {
        TargetExpr::Direct(p) => p.to_string(),
        TargetExpr::OffsetCall { function, position, offset } => {
            format!("{}({},{},{},{})", function.keyword(), position, offset.dx, offset.dy, offset.dz)
        }
    }
}

/// One instruction in canonical form, without indentation.
pub fn print_instruction(instr: &MovementInstruction) -> String {
    let mut s = String::with_capacity(96);
    s.push_str(instr.kind.keyword());
    s.push(' ');
    if let Some(id) = &instr.id {
        let _ = write!(s, "{id},");
    }
    let _ = write!(s, "{},{},{},{}", print_target(&instr.target), instr.velocity, instr.zone, instr.tool);
    if let Some(wo) = &instr.work_object {
        let _ = write!(s, "\\WObj:={wo}");
    }
    if instr.no_move {
        s.push_str("\\NoMove");
    }
    s.push(';');
    s
}

fn push_body_line(out: &mut String, line: &BodyLine) {
    out.push_str(INDENT);
    match line {
        BodyLine::Comment(c) => {
            out.push('!');
            out.push_str(c);
        }
        BodyLine::Statement(s) => out.push_str(s),
    }
    out.push('\n');
}

fn push_header_comment(out: &mut String, tag: &str, pad: &str, text: &str) {
    out.push_str(INDENT);
    out.push_str(tag);
    if !text.is_empty() {
        out.push_str(pad);
        out.push_str(text);
    }
    out.push('\n');
}

/// Canonical text of a routine: four-space indentation, From/To comments
/// first, one instruction per line, no trailing newline.
pub fn print_routine(routine: &Routine) -> String {
    let mut out = String::with_capacity(64 + routine.instructions.len() * 96);
    if routine.local {
        out.push_str("LOCAL ");
    }
    let _ = writeln!(out, "PROC {}()", routine.name);
    if let Some(from) = &routine.from_comment {
        push_header_comment(&mut out, "!From:", "  ", from);
    }
    if let Some(to) = &routine.to_comment {
        push_header_comment(&mut out, "!To:", "    ", to);
    }
    for instr in &routine.instructions {
        for line in &instr.leading {
            push_body_line(&mut out, line);
        }
        out.push_str(INDENT);
        out.push_str(&print_instruction(instr));
        out.push('\n');
    }
    for line in &routine.trailing {
        push_body_line(&mut out, line);
    }
    out.push_str("ENDPROC");
    out
}

/// Routines canonically printed, opaque spans verbatim, in source order.
pub fn print_module(module: &SourceModule) -> String {
    let mut out = String::new();
    for item in &module.items {
        match item {
            ModuleItem::Routine(r) => out.push_str(&print_routine(r)),
            ModuleItem::Opaque(s) => out.push_str(s),
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{parse_module, parse_routine};
    use super::*;

    const LISTING_1_INDENTED: &str = "    PROC mvid1_id2()
        !From:  Start Position
        !To:    End Position
        MoveJ id1,position1,velocity,zone,tool\\WObj:=world_object\\NoMove;
        MoveJ id2,position2,velocity,zone,tool\\WObj:=world_object;
    ENDPROC     ";

    const CANONICAL: &str = "PROC mvid1_id2()
    !From:  Start Position
    !To:    End Position
    MoveJ id1,position1,velocity,zone,tool\\WObj:=world_object\\NoMove;
    MoveJ id2,position2,velocity,zone,tool\\WObj:=world_object;
ENDPROC";

    #[test]
    fn canonical_form_of_listing_one() {
        let r = parse_routine(LISTING_1_INDENTED).unwrap();
        assert_eq!(print_routine(&r), CANONICAL);
        assert_eq!(parse_routine(CANONICAL).unwrap(), r);
    }

    #[test]
    fn printing_is_deterministic_and_clean() {
        let r = parse_routine(CANONICAL).unwrap();
        let a = print_routine(&r);
        assert_eq!(a, print_routine(&r));
        assert!(a.lines().all(|l| l == l.trim_end()));
    }

    #[test]
    fn spaced_arguments_are_normalized() {
        let r = parse_routine("PROC mv400_410()\n  MT_MoveJ 400, pR7_400, vR7_rapid , z50,toR7_active \\ WObj := woR7_Base \\NoMove ;\n  MoveL Offs( p , -1.5 ,0, 100),v,z,t;\nENDPROC").unwrap();
        let printed = print_routine(&r);
        assert!(printed.contains("    MT_MoveJ 400,pR7_400,vR7_rapid,z50,toR7_active\\WObj:=woR7_Base\\NoMove;\n"));
        assert!(printed.contains("    MoveL Offs(p,-1.5,0,100),v,z,t;\n"));
    }

    #[test]
    fn empty_header_comment_has_no_trailing_space() {
        let r = parse_routine("PROC mva_b()\n!From:\n!To:   \nMoveJ p1,v,z,t;\nMoveJ p2,v,z,t;\nENDPROC").unwrap();
        let printed = print_routine(&r);
        assert!(printed.contains("    !From:\n    !To:\n"));
        assert_eq!(parse_routine(&printed).unwrap(), r);
    }

    #[test]
    fn module_reprint_is_parse_equivalent() {
        let src = format!("MODULE M\n{LISTING_1_INDENTED}\nPROC other()\n  Stop;\nENDPROC\nENDMODULE");
        let m = parse_module(&src);
        let again = parse_module(&print_module(&m));
        assert_eq!(again.items, m.items);
    }
}
