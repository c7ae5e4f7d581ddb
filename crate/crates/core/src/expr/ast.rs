use std::fmt;

/// Byte range of a node in the source text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span { start: self.start.min(other.start), end: self.end.max(other.end) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Pow,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 8] = [Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Abs, Func::Pow, Func::Min, Func::Max];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Pow => "pow",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow | Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Expression tree over `t` and `u`. Equality ignores source spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Self { kind, span }
    }

    /// A node with an empty span, for trees built in code.
    pub fn synthetic(kind: ExprKind) -> Self {
        Self { kind, span: Span::default() }
    }

    pub fn num(v: f64) -> Self {
        Self::synthetic(ExprKind::Num(v))
    }

    pub fn var(v: Var) -> Self {
        Self::synthetic(ExprKind::Var(v))
    }

    pub fn neg(e: Expr) -> Self {
        Self::synthetic(ExprKind::Neg(Box::new(e)))
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Self {
        Self::synthetic(ExprKind::Binary(op, Box::new(a), Box::new(b)))
    }

    pub fn call(f: Func, args: Vec<Expr>) -> Self {
        Self::synthetic(ExprKind::Call(f, args))
    }

    /// Node count.
    pub fn size(&self) -> usize {
        match &self.kind {
            ExprKind::Num(_) | ExprKind::Var(_) => 1,
            ExprKind::Neg(e) => 1 + e.size(),
            ExprKind::Binary(_, a, b) => 1 + a.size() + b.size(),
            ExprKind::Call(_, args) => 1 + args.iter().map(Expr::size).sum::<usize>(),
        }
    }

    pub fn mentions(&self, v: Var) -> bool {
        match &self.kind {
            ExprKind::Num(_) => false,
            ExprKind::Var(w) => *w == v,
            ExprKind::Neg(e) => e.mentions(v),
            ExprKind::Binary(_, a, b) => a.mentions(v) || b.mentions(v),
            ExprKind::Call(_, args) => args.iter().any(|a| a.mentions(v)),
        }
    }

    /// Value of a subtree free of `t` and `u` built from literals and negation.
    pub(crate) fn as_constant(&self) -> Option<f64> {
        match &self.kind {
            ExprKind::Num(v) => Some(*v),
            ExprKind::Neg(e) => e.as_constant().map(|v| -v),
            _ => None,
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Num(a), ExprKind::Num(b)) => a.to_bits() == b.to_bits(),
            (ExprKind::Var(a), ExprKind::Var(b)) => a == b,
            (ExprKind::Neg(a), ExprKind::Neg(b)) => a == b,
            (ExprKind::Binary(o1, a1, b1), ExprKind::Binary(o2, a2, b2)) => o1 == o2 && a1 == a2 && b1 == b2,
            (ExprKind::Call(f1, a1), ExprKind::Call(f2, a2)) => f1 == f2 && a1 == a2,
            _ => false,
        }
    }
}

/// Canonical, fully parenthesized form; parsing it gives back an equal tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(v) => write!(f, "{v:?}"),
            ExprKind::Var(Var::T) => f.write_str("t"),
            ExprKind::Var(Var::U) => f.write_str("u"),
            ExprKind::Neg(e) => write!(f, "(-{e})"),
            ExprKind::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            ExprKind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
