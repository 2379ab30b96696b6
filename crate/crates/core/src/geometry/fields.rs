//! Expression-backed metric, symmetric 2-tensor and scalar fields.

use crate::expr::{Expression, Program, ProgramScratch};
use crate::jets::JetLayout;

use super::{GeometryError, JetTensor};

/// Position of `(i, j)` in lower-triangle storage.
pub fn tri_index(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

/// A symmetric (0,2) field given by lower-triangle component formulas.
#[derive(Debug, Clone)]
pub struct SymmetricField {
    dim: usize,
    components: Vec<Expression>,
    program: Program,
    seed: Option<u64>,
}

impl SymmetricField {
    /// `components` lists `h_ij` for `j ≤ i` row by row:
    /// `h11, h21, h22, h31, …`.
    pub fn new(dim: usize, components: Vec<Expression>) -> Result<Self, GeometryError> {
        let want = dim * (dim + 1) / 2;
        if components.len() != want {
            return Err(GeometryError::ComponentCount {
                got: components.len(),
                want,
            });
        }
        if let Some(bad) = components.iter().find(|e| e.dim() != dim) {
            return Err(GeometryError::DimMismatch(bad.dim(), dim));
        }
        let refs: Vec<&Expression> = components.iter().collect();
        let program = Program::compile(dim, &refs);
        Ok(SymmetricField {
            dim,
            components,
            program,
            seed: None,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Formula for `h_ij` (0-based, either order).
    pub fn component(&self, i: usize, j: usize) -> &Expression {
        &self.components[tri_index(i, j)]
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    /// Whether any component depends on the 0-based axis.
    pub fn depends_on(&self, axis: usize) -> bool {
        self.program.depends_on(axis)
    }

    pub fn scaled(&self, c: f64) -> Result<Self, GeometryError> {
        SymmetricField::new(self.dim, self.components.iter().map(|e| e.scaled(c)).collect())
    }

    /// `self + eps * other`.
    pub fn plus_scaled(&self, other: &SymmetricField, eps: f64) -> Result<Self, GeometryError> {
        if other.dim != self.dim {
            return Err(GeometryError::DimMismatch(other.dim, self.dim));
        }
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.plus(&b.scaled(eps)))
            .collect();
        SymmetricField::new(self.dim, comps)
    }

    /// Block-diagonal sum on the product chart: `a` on the first variables,
    /// `b` on the remaining ones.
    pub fn block_diagonal(a: &SymmetricField, b: &SymmetricField) -> Result<Self, GeometryError> {
        let dim = a.dim + b.dim;
        let mut comps = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                let e = if i < a.dim {
                    a.component(i, j).embedded(0, dim)
                } else if j >= a.dim {
                    b.component(i - a.dim, j - a.dim).embedded(a.dim, dim)
                } else {
                    Expression::constant(0.0, dim)
                };
                comps.push(e);
            }
        }
        SymmetricField::new(dim, comps)
    }

    pub fn scratch(&self, layout: &JetLayout, order: usize) -> ProgramScratch {
        self.program.scratch(layout, order)
    }

    /// Component jets at `point`, mirrored into a dense rank-2 tensor.
    pub fn eval_jets(
        &self,
        layout: &JetLayout,
        point: &[f64],
        order: usize,
        scratch: &mut ProgramScratch,
    ) -> Result<JetTensor, GeometryError> {
        let n = self.dim;
        self.program
            .eval(layout, point, scratch)
            .map_err(|source| GeometryError::Eval {
                point: point.to_vec(),
                source,
            })?;
        let mut t = JetTensor::zeros(layout, 2, order);
        let len = layout.len(order);
        for i in 0..n {
            for j in 0..n {
                let src = self.program.output(scratch, tri_index(i, j));
                t.comp_mut(i * n + j).copy_from_slice(&src[..len]);
            }
        }
        Ok(t)
    }

    /// Plain component values at `point` as a dense row-major matrix.
    pub fn eval_matrix(&self, point: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.component(i, j).eval(point).map_err(|source| GeometryError::Eval {
                    point: point.to_vec(),
                    source,
                })?;
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        Ok(out)
    }
}

/// A Riemannian metric given by component formulas.
#[derive(Debug, Clone)]
pub struct MetricField {
    field: SymmetricField,
}

impl MetricField {
    pub fn new(dim: usize, components: Vec<Expression>) -> Result<Self, GeometryError> {
        Ok(MetricField {
            field: SymmetricField::new(dim, components)?,
        })
    }

    pub fn from_field(field: SymmetricField) -> Self {
        MetricField { field }
    }

    pub fn as_field(&self) -> &SymmetricField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.field.dim
    }

    pub fn component(&self, i: usize, j: usize) -> &Expression {
        self.field.component(i, j)
    }

    pub fn depends_on(&self, axis: usize) -> bool {
        self.field.depends_on(axis)
    }

    /// The metric `c·g`.
    pub fn scaled(&self, c: f64) -> Result<Self, GeometryError> {
        Ok(MetricField {
            field: self.field.scaled(c)?,
        })
    }

    /// The metric `g + eps·h`.
    pub fn perturbed(&self, h: &SymmetricField, eps: f64) -> Result<Self, GeometryError> {
        Ok(MetricField {
            field: self.field.plus_scaled(h, eps)?,
        })
    }

    pub fn product(a: &MetricField, b: &MetricField) -> Result<Self, GeometryError> {
        Ok(MetricField {
            field: SymmetricField::block_diagonal(&a.field, &b.field)?,
        })
    }

    pub fn scratch(&self, layout: &JetLayout, order: usize) -> ProgramScratch {
        self.field.scratch(layout, order)
    }

    pub fn eval_matrix(&self, point: &[f64]) -> Result<Vec<f64>, GeometryError> {
        self.field.eval_matrix(point)
    }
}

/// A scalar field given by one formula.
#[derive(Debug, Clone)]
pub struct ScalarField {
    expr: Expression,
    program: Program,
    seed: Option<u64>,
}

impl ScalarField {
    pub fn new(expr: Expression) -> Self {
        let program = Program::compile(expr.dim(), &[&expr]);
        ScalarField {
            expr,
            program,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.expr.dim()
    }

    pub fn expression(&self) -> &Expression {
        &self.expr
    }

    pub fn depends_on(&self, axis: usize) -> bool {
        self.program.depends_on(axis)
    }

    pub fn scratch(&self, layout: &JetLayout, order: usize) -> ProgramScratch {
        self.program.scratch(layout, order)
    }

    pub fn eval_jets(
        &self,
        layout: &JetLayout,
        point: &[f64],
        order: usize,
        scratch: &mut ProgramScratch,
    ) -> Result<JetTensor, GeometryError> {
        self.program
            .eval(layout, point, scratch)
            .map_err(|source| GeometryError::Eval {
                point: point.to_vec(),
                source,
            })?;
        let mut t = JetTensor::zeros(layout, 0, order);
        let len = layout.len(order);
        t.comp_mut(0).copy_from_slice(&self.program.output(scratch, 0)[..len]);
        Ok(t)
    }
}
