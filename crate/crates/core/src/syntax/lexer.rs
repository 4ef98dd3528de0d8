use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Lower-case or quoted identifier.
    Ident(String),
    Var(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Semicolon,
    Period,
    Neck,
    Implies,
    Wedge,
    Minus,
    Plus,
    Star,
    Slash,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Var(s) => format!("variable {s}"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Semicolon => "';'".into(),
            Tok::Period => "'.'".into(),
            Tok::Neck => "':-'".into(),
            Tok::Implies => "'=>'".into(),
            Tok::Wedge => "'/\\'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Eq => "'='".into(),
            Tok::Ne => "'\\='".into(),
            Tok::Lt => "'<'".into(),
            Tok::Gt => "'>'".into(),
            Tok::Le => "'=<'".into(),
            Tok::Ge => "'>='".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
    /// Quoted identifiers are never keywords.
    pub quoted: bool,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! advance {
        ($n:expr) => {
            for _ in 0..$n {
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        };
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance!(1);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                advance!(1);
            }
            continue;
        }
        let pos = Pos { line, col };
        let next = chars.get(i + 1).copied();
        let mut quoted = false;
        let (tok, len) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ',' => (Tok::Comma, 1),
            ';' => (Tok::Semicolon, 1),
            '.' => (Tok::Period, 1),
            '+' => (Tok::Plus, 1),
            '*' => (Tok::Star, 1),
            '-' => (Tok::Minus, 1),
            ':' if next == Some('-') => (Tok::Neck, 2),
            '=' if next == Some('>') => (Tok::Implies, 2),
            '=' if next == Some('<') => (Tok::Le, 2),
            '=' => (Tok::Eq, 1),
            '\\' if next == Some('=') => (Tok::Ne, 2),
            '/' if next == Some('\\') => (Tok::Wedge, 2),
            '/' => (Tok::Slash, 1),
            '<' => (Tok::Lt, 1),
            '>' if next == Some('=') => (Tok::Ge, 2),
            '>' => (Tok::Gt, 1),
            '\'' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        None | Some('\n') => {
                            return Err(SyntaxError::new(pos, "unterminated quoted atom"));
                        }
                        Some('\'') if chars.get(j + 1) == Some(&'\'') => {
                            s.push('\'');
                            j += 2;
                        }
                        Some('\'') => break,
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                quoted = true;
                (Tok::Ident(s), j + 1 - i)
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let value =
                    text.parse::<i64>().map_err(|_| SyntaxError::new(pos, format!("integer out of range: {text}")))?;
                (Tok::Int(value), j - i)
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                if c.is_uppercase() || c == '_' {
                    (Tok::Var(text), j - i)
                } else {
                    (Tok::Ident(text), j - i)
                }
            }
            other => {
                return Err(SyntaxError::new(pos, format!("unexpected character '{other}'")));
            }
        };
        out.push(Token { tok, pos, quoted });
        advance!(len);
    }
    Ok(out)
}
