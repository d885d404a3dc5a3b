use core::fmt;

/// Register contents. Latent registers additionally use `-1` and `|Ω|` as
/// out-of-range sentinels.
pub type Value = i32;

/// Largest predicate arity an indirect address can carry.
pub const MAX_ARITY: usize = 4;

/// A latent register `z{n+1}`, stored 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatentId(pub u8);

impl LatentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for LatentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z{}", self.0 as usize + 1)
    }
}

/// A state variable `pred(z_a, z_b, ...)` whose object arguments are read
/// from latent registers at execution time.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: u16,
    len: u8,
    args: [u8; MAX_ARITY],
}

impl Atom {
    pub fn new(pred: u16, args: &[LatentId]) -> Self {
        assert!(args.len() <= MAX_ARITY, "atom arity exceeds {MAX_ARITY}");
        let mut buf = [0u8; MAX_ARITY];
        for (slot, z) in buf.iter_mut().zip(args) {
            *slot = z.0;
        }
        Atom { pred, len: args.len() as u8, args: buf }
    }

    pub fn arity(&self) -> usize {
        self.len as usize
    }

    pub fn args(&self) -> impl Iterator<Item = LatentId> + '_ {
        self.args[..self.len as usize].iter().map(|&z| LatentId(z))
    }

    pub fn mentions(&self, z: LatentId) -> bool {
        self.args().any(|a| a == z)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}(", self.pred)?;
        for (i, z) in self.args().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{z}")?;
        }
        f.write_str(")")
    }
}

/// How a pre/post-state register is located.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Address {
    /// Fixed position in the state vector.
    Direct(usize),
    /// Grounded at execution time from the latent registers.
    Indirect(Atom),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Reg {
    /// Read-only pre-state register.
    Pre(Address),
    /// Write-only post-state register.
    Post(Address),
    Latent(LatentId),
}

impl Reg {
    pub fn pre(atom: Atom) -> Self {
        Reg::Pre(Address::Indirect(atom))
    }

    pub fn post(atom: Atom) -> Self {
        Reg::Post(Address::Indirect(atom))
    }

    pub fn latent(z: u8) -> Self {
        Reg::Latent(LatentId(z))
    }

    pub fn as_latent(&self) -> Option<LatentId> {
        match self {
            Reg::Latent(z) => Some(*z),
            _ => None,
        }
    }

    pub fn atom(&self) -> Option<&Atom> {
        match self {
            Reg::Pre(Address::Indirect(a)) | Reg::Post(Address::Indirect(a)) => Some(a),
            _ => None,
        }
    }

    /// True when the register's address depends on latent `z`.
    pub fn depends_on(&self, z: LatentId) -> bool {
        match self {
            Reg::Latent(l) => *l == z,
            Reg::Pre(Address::Indirect(a)) | Reg::Post(Address::Indirect(a)) => a.mentions(z),
            _ => false,
        }
    }
}

/// The zero and carry flags.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Flags {
    pub zf: bool,
    pub cf: bool,
}

impl Flags {
    pub const NEGATIVE: Flags = Flags { zf: false, cf: false };
    pub const ZERO: Flags = Flags { zf: true, cf: false };
    pub const POSITIVE: Flags = Flags { zf: false, cf: true };

    pub fn from_res(res: i64) -> Self {
        Flags { zf: res == 0, cf: res > 0 }
    }
}

/// A conditional jump. Execution falls through to the next line when the
/// flags equal `guard` and continues at `target` otherwise, so a single
/// jump both skips an if-body whose condition fails and closes a for-loop
/// whose exit pattern has not been reached yet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Jump {
    pub guard: Flags,
    pub target: usize,
}

impl Jump {
    pub const PENDING: usize = usize::MAX;

    pub fn is_pending(&self) -> bool {
        self.target == Self::PENDING
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Instruction {
    Inc(Reg),
    Dec(Reg),
    Test(Reg),
    /// `set(r, 0|1)`.
    SetConst(Reg, bool),
    /// `set(dst, src)`.
    SetReg(Reg, Reg),
    Cmp(Reg, Reg),
    Jmp(Jump),
    Halt,
}

impl Instruction {
    /// The register written by this instruction, if any.
    pub fn written(&self) -> Option<Reg> {
        match *self {
            Instruction::Inc(r)
            | Instruction::Dec(r)
            | Instruction::SetConst(r, _)
            | Instruction::SetReg(r, _) => Some(r),
            _ => None,
        }
    }

    pub fn jump(&self) -> Option<&Jump> {
        match self {
            Instruction::Jmp(j) => Some(j),
            _ => None,
        }
    }

    /// True for writes into the post-state bank.
    pub fn writes_post(&self) -> bool {
        matches!(self.written(), Some(Reg::Post(_)))
    }
}
