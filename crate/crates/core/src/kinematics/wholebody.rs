use nalgebra::DMatrix;

use crate::dq::{c8, DualQuaternion, ONE};
use crate::error::{check_len, Error, Result};

use super::{dyn8, Kinematics, MobileBase, SerialManipulator};

/// One element of a whole-body chain.
#[derive(Clone, Debug, PartialEq)]
pub enum Subchain {
    Serial(SerialManipulator),
    Base(MobileBase),
}

impl Kinematics for Subchain {
    fn dof(&self) -> usize {
        match self {
            Subchain::Serial(s) => s.dof(),
            Subchain::Base(b) => b.dof(),
        }
    }

    fn fkm(&self, q: &[f64]) -> Result<DualQuaternion> {
        match self {
            Subchain::Serial(s) => s.fkm(q),
            Subchain::Base(b) => b.fkm(q),
        }
    }

    fn pose_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        match self {
            Subchain::Serial(s) => s.pose_jacobian(q),
            Subchain::Base(b) => b.pose_jacobian(q),
        }
    }

    fn pose_jacobian_derivative(&self, q: &[f64], q_dot: &[f64]) -> Result<DMatrix<f64>> {
        match self {
            Subchain::Serial(s) => s.pose_jacobian_derivative(q, q_dot),
            Subchain::Base(b) => b.pose_jacobian_derivative(q, q_dot),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Link {
    chain: Subchain,
    reversed: bool,
}

/// Serial composition of bases and arms. A reversed element contributes the
/// conjugate of its pose and consumes its configuration block in reverse
/// order.
#[derive(Clone, Debug, PartialEq)]
pub struct WholeBodyChain {
    pub name: String,
    links: Vec<Link>,
}

struct Evaluated {
    poses: Vec<DualQuaternion>,
    jacobians: Vec<DMatrix<f64>>,
}

fn reverse_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    DMatrix::from_fn(m.nrows(), n, |r, c| m[(r, n - 1 - c)])
}

impl WholeBodyChain {
    pub fn new(name: impl Into<String>, first: Subchain) -> Self {
        WholeBodyChain {
            name: name.into(),
            links: vec![Link {
                chain: first,
                reversed: false,
            }],
        }
    }

    pub fn add(&mut self, chain: Subchain) {
        self.links.push(Link {
            chain,
            reversed: false,
        });
    }

    pub fn add_reversed(&mut self, chain: Subchain) {
        self.links.push(Link {
            chain,
            reversed: true,
        });
    }

    /// The subchains with their reversed flags.
    pub fn chain(&self) -> impl Iterator<Item = (&Subchain, bool)> {
        self.links.iter().map(|l| (&l.chain, l.reversed))
    }

    /// Reorders a sequential configuration vector into the per-chain order:
    /// blocks of reversed chains are reversed, the rest are unchanged.
    pub fn sequential(&self, q: &[f64]) -> Result<Vec<f64>> {
        check_len("whole-body configuration", self.dof(), q.len())?;
        let mut out = Vec::with_capacity(q.len());
        let mut offset = 0;
        for link in &self.links {
            let n = link.chain.dof();
            let block = &q[offset..offset + n];
            if link.reversed {
                out.extend(block.iter().rev());
            } else {
                out.extend_from_slice(block);
            }
            offset += n;
        }
        Ok(out)
    }

    fn blocks<'a>(&self, q: &'a [f64]) -> Vec<&'a [f64]> {
        let mut offset = 0;
        self.links
            .iter()
            .map(|l| {
                let n = l.chain.dof();
                let b = &q[offset..offset + n];
                offset += n;
                b
            })
            .collect()
    }

    fn chain_config(link: &Link, block: &[f64]) -> Vec<f64> {
        if link.reversed {
            block.iter().rev().copied().collect()
        } else {
            block.to_vec()
        }
    }

    fn evaluate(&self, q: &[f64], with_jacobians: bool) -> Result<Evaluated> {
        check_len("whole-body configuration", self.dof(), q.len())?;
        let mut poses = Vec::with_capacity(self.links.len());
        let mut jacobians = Vec::new();
        for (link, block) in self.links.iter().zip(self.blocks(q)) {
            let qk = Self::chain_config(link, block);
            let x = link.chain.fkm(&qk)?;
            poses.push(if link.reversed { x.conj() } else { x });
            if with_jacobians {
                let j = link.chain.pose_jacobian(&qk)?;
                jacobians.push(if link.reversed {
                    reverse_columns(&(dyn8(&c8()) * j))
                } else {
                    j
                });
            }
        }
        Ok(Evaluated { poses, jacobians })
    }

    fn prefixes_suffixes(poses: &[DualQuaternion]) -> (Vec<DualQuaternion>, Vec<DualQuaternion>) {
        let n = poses.len();
        let mut prefix = vec![ONE; n];
        for k in 1..n {
            prefix[k] = prefix[k - 1] * poses[k - 1];
        }
        let mut suffix = vec![ONE; n];
        for k in (0..n.saturating_sub(1)).rev() {
            suffix[k] = poses[k + 1] * suffix[k + 1];
        }
        (prefix, suffix)
    }
}

impl Kinematics for WholeBodyChain {
    fn dof(&self) -> usize {
        self.links.iter().map(|l| l.chain.dof()).sum()
    }

    fn fkm(&self, q: &[f64]) -> Result<DualQuaternion> {
        let eval = self.evaluate(q, false)?;
        Ok(eval.poses.iter().fold(ONE, |acc, x| acc * *x))
    }

    fn pose_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let eval = self.evaluate(q, true)?;
        let (prefix, suffix) = Self::prefixes_suffixes(&eval.poses);
        let mut jac = DMatrix::zeros(8, self.dof());
        let mut col = 0;
        for (k, jk) in eval.jacobians.iter().enumerate() {
            let block = dyn8(&(prefix[k].hamiplus8() * suffix[k].haminus8())) * jk;
            jac.columns_mut(col, jk.ncols()).copy_from(&block);
            col += jk.ncols();
        }
        Ok(jac)
    }

    fn pose_jacobian_derivative(&self, q: &[f64], q_dot: &[f64]) -> Result<DMatrix<f64>> {
        check_len("whole-body velocity", self.dof(), q_dot.len())?;
        let eval = self.evaluate(q, true)?;
        let n = eval.poses.len();

        let mut pose_rates = Vec::with_capacity(n);
        let mut jac_rates = Vec::with_capacity(n);
        for ((link, block), (jk, qd_block)) in self
            .links
            .iter()
            .zip(self.blocks(q))
            .zip(eval.jacobians.iter().zip(self.blocks(q_dot)))
        {
            let v = jk * nalgebra::DVector::from_column_slice(qd_block);
            pose_rates.push(DualQuaternion::from_vec(v.as_slice())?);
            let qk = Self::chain_config(link, block);
            let qdk = Self::chain_config(link, qd_block);
            let jd = link.chain.pose_jacobian_derivative(&qk, &qdk)?;
            jac_rates.push(if link.reversed {
                reverse_columns(&(dyn8(&c8()) * jd))
            } else {
                jd
            });
        }

        let (prefix, suffix) = Self::prefixes_suffixes(&eval.poses);
        let mut prefix_rate = vec![DualQuaternion::default(); n];
        for k in 1..n {
            prefix_rate[k] = prefix_rate[k - 1] * eval.poses[k - 1] + prefix[k - 1] * pose_rates[k - 1];
        }
        let mut suffix_rate = vec![DualQuaternion::default(); n];
        for k in (0..n.saturating_sub(1)).rev() {
            suffix_rate[k] = pose_rates[k + 1] * suffix[k + 1] + eval.poses[k + 1] * suffix_rate[k + 1];
        }

        let mut jac = DMatrix::zeros(8, self.dof());
        let mut col = 0;
        for k in 0..n {
            let jk = &eval.jacobians[k];
            let m = prefix_rate[k].hamiplus8() * suffix[k].haminus8()
                + prefix[k].hamiplus8() * suffix_rate[k].haminus8();
            let block = dyn8(&m) * jk
                + dyn8(&(prefix[k].hamiplus8() * suffix[k].haminus8())) * &jac_rates[k];
            jac.columns_mut(col, jk.ncols()).copy_from(&block);
            col += jk.ncols();
        }
        Ok(jac)
    }
}

impl WholeBodyChain {
    /// Index range of the configuration block that belongs to subchain `k`.
    pub fn block_range(&self, k: usize) -> Result<std::ops::Range<usize>> {
        if k >= self.links.len() {
            return Err(Error::domain(format!("whole-body chain has no subchain {k}")));
        }
        let start: usize = self.links[..k].iter().map(|l| l.chain.dof()).sum();
        Ok(start..start + self.links[k].chain.dof())
    }
}
