use std::fmt;
use std::sync::Arc;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Type {
    Nat,
    Arrow(Arc<Type>, Arc<Type>),
    Product(Arc<Type>, Arc<Type>),
}

impl Type {
    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Arc::new(a), Arc::new(b))
    }

    pub fn product(a: Type, b: Type) -> Type {
        Type::Product(Arc::new(a), Arc::new(b))
    }

    /// `a1 -> a2 -> ... -> r`
    pub fn arrows(args: &[Type], result: Type) -> Type {
        args.iter().rev().fold(result, |acc, a| Type::arrow(a.clone(), acc))
    }

    pub fn as_arrow(&self) -> Option<(&Type, &Type)> {
        match self {
            Type::Arrow(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn as_product(&self) -> Option<(&Type, &Type)> {
        match self {
            Type::Product(a, b) => Some((a, b)),
            _ => None,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // prec 0: anything; 1: operand of `*` on the left (no arrows, no products);
        // 2: operand of `*` on the right (no arrows)
        fn go(t: &Type, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                Type::Nat => write!(f, "Nat"),
                Type::Arrow(a, b) => {
                    if prec > 0 {
                        write!(f, "(")?;
                    }
                    go_arrow_left(a, f)?;
                    write!(f, " -> ")?;
                    go(b, 0, f)?;
                    if prec > 0 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                Type::Product(a, b) => {
                    if prec == 1 {
                        write!(f, "(")?;
                    }
                    go(a, 1, f)?;
                    write!(f, " * ")?;
                    go(b, 2, f)?;
                    if prec == 1 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        fn go_arrow_left(t: &Type, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                Type::Arrow(..) => {
                    write!(f, "(")?;
                    go(t, 0, f)?;
                    write!(f, ")")
                }
                _ => go(t, 2, f),
            }
        }
        go(self, 0, f)
    }
}
