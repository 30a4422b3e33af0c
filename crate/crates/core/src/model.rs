//! Model configuration, degree-of-freedom layout and solution fields.

use crate::geometry::{CouplingMode, GridDomain, Label, Point};
use crate::kernels::{Coefficient, KernelSpec, SurfaceKernelSpec};
use crate::{Error, Result};

/// The energy being minimized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// `E_i`: nonlocal interactions over `Ω_nℓ × ℝ^N`.
    ScalarSource,
    /// `Ẽ_i`: interactions over `(ℝ^N∖Ω_ℓ) × ℝ^N`.
    ScalarSourceFull,
    /// `E_ii`: nonlocal over `Ω_nℓ × (ℝ^N∖Ω_ℓ)` plus surface coupling on Γ.
    ScalarFlux,
    /// `E_I`: linearized elasticity plus bonds over `Ω_nℓ × ℝ^N`.
    ElasticSource,
    /// `E_II`: linearized elasticity, bonds over `Ω_nℓ × (ℝ^N∖Ω_ℓ)`, bonds to Γ.
    ElasticFlux,
    /// `E^{p,r}`: p-Laplacian locally, r-power differences over `Ω_nℓ × Ω`.
    Nonlinear,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::ScalarSource,
        ModelKind::ScalarSourceFull,
        ModelKind::ScalarFlux,
        ModelKind::ElasticSource,
        ModelKind::ElasticFlux,
        ModelKind::Nonlinear,
    ];

    pub fn is_elastic(self) -> bool {
        matches!(self, ModelKind::ElasticSource | ModelKind::ElasticFlux)
    }

    pub fn is_flux(self) -> bool {
        matches!(self, ModelKind::ScalarFlux | ModelKind::ElasticFlux)
    }

    pub fn nonlocal_mode(self) -> NonlocalMode {
        match self {
            ModelKind::ScalarSource | ModelKind::ElasticSource => NonlocalMode::Source,
            ModelKind::ScalarSourceFull => NonlocalMode::SourceFull,
            ModelKind::ScalarFlux | ModelKind::ElasticFlux => NonlocalMode::Flux,
            ModelKind::Nonlinear => NonlocalMode::Interior,
        }
    }

    pub fn coupling_mode(self) -> CouplingMode {
        if self.is_flux() {
            CouplingMode::Flux
        } else {
            CouplingMode::Source
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::ScalarSource => "scalar_source",
            ModelKind::ScalarSourceFull => "scalar_source_full",
            ModelKind::ScalarFlux => "scalar_flux",
            ModelKind::ElasticSource => "elastic_source",
            ModelKind::ElasticFlux => "elastic_flux",
            ModelKind::Nonlinear => "nonlinear",
        }
    }

    pub fn from_name(s: &str) -> Option<ModelKind> {
        ModelKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Index set of the nonlocal double integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NonlocalMode {
    /// `Ω_nℓ × ℝ^N`.
    Source,
    /// `(ℝ^N∖Ω_ℓ) × ℝ^N`, without exterior–exterior pairs.
    SourceFull,
    /// `Ω_nℓ × (ℝ^N∖Ω_ℓ)`.
    Flux,
    /// `Ω_nℓ × Ω`.
    Interior,
}

impl NonlocalMode {
    /// Weight multiplying `J` for the unordered pair of labels `(a, b)`, where
    /// the quadratic energy is `Σ_pairs weight·J·(u(y)−u(x))²·h^{2N}`.
    pub fn pair_factor(self, a: Label, b: Label) -> f64 {
        use Label::*;
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        match (self, a, b) {
            (_, Nonlocal, Nonlocal) => 1.0,
            (NonlocalMode::Flux, Local, Nonlocal) => 0.0,
            (_, Local, Nonlocal) => 0.5,
            (NonlocalMode::SourceFull, Nonlocal, Exterior) => 1.0,
            (NonlocalMode::SourceFull, Local, Exterior) => 0.5,
            (NonlocalMode::Interior, Nonlocal, Exterior) => 0.0,
            (_, Nonlocal, Exterior) => 0.5,
            _ => 0.0,
        }
    }
}

/// Which boundary mechanisms are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Constraints {
    /// Eliminate LOCAL vertices on ∂Ω.
    pub dirichlet: bool,
    /// Keep interactions with EXTERIOR cells.
    pub exterior: bool,
}

impl Default for Constraints {
    fn default() -> Self {
        Constraints {
            dirichlet: true,
            exterior: true,
        }
    }
}

impl Constraints {
    pub const NONE: Constraints = Constraints {
        dirichlet: false,
        exterior: false,
    };
}

#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Zero,
    Constant(f64),
    /// `amplitude·exp(−‖x−center‖²/width²)`.
    GaussianBump {
        center: Point,
        amplitude: f64,
        width: f64,
    },
    /// `amplitude·Π_d sin(freq_d·π·x_d)`.
    SeparableSine {
        amplitude: f64,
        freq: [f64; 2],
    },
    /// `intercept + slope·x`.
    Linear {
        slope: Point,
        intercept: f64,
    },
}

impl Profile {
    pub fn eval(&self, x: &Point, dim: usize) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Constant(v) => *v,
            Profile::GaussianBump {
                center,
                amplitude,
                width,
            } => {
                let r2: f64 = (0..dim).map(|d| (x[d] - center[d]).powi(2)).sum();
                amplitude * (-r2 / (width * width)).exp()
            }
            Profile::SeparableSine { amplitude, freq } => {
                amplitude
                    * (0..dim)
                        .map(|d| (freq[d] * std::f64::consts::PI * x[d]).sin())
                        .product::<f64>()
            }
            Profile::Linear { slope, intercept } => intercept + (0..dim).map(|d| slope[d] * x[d]).sum::<f64>(),
        }
    }
}

/// A scalar profile times a fixed direction; scalar fields use component 0.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldPreset {
    pub profile: Profile,
    pub direction: Point,
}

impl Default for FieldPreset {
    fn default() -> Self {
        FieldPreset::zero()
    }
}

impl FieldPreset {
    pub fn zero() -> Self {
        FieldPreset::scalar(Profile::Zero)
    }

    pub fn scalar(profile: Profile) -> Self {
        FieldPreset {
            profile,
            direction: [1.0, 0.0],
        }
    }

    pub fn vector(profile: Profile, direction: Point) -> Self {
        FieldPreset { profile, direction }
    }

    pub fn value(&self, x: &Point, dim: usize, comp: usize) -> f64 {
        let d = self.direction[comp];
        if d == 0.0 {
            return 0.0;
        }
        self.profile.eval(x, dim) * d
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.profile, Profile::Zero)
            || matches!(self.profile, Profile::Constant(v) if v == 0.0)
            || self.direction.iter().all(|&d| d == 0.0)
    }
}

/// Lamé coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticParams {
    pub mu: f64,
    pub lambda: f64,
}

impl Default for ElasticParams {
    fn default() -> Self {
        ElasticParams { mu: 1.0, lambda: 1.0 }
    }
}

impl ElasticParams {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu > 0.0) || !(lambda > 0.0) || !mu.is_finite() || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Lamé coefficients must be positive, got mu={mu}, lambda={lambda}"
            )));
        }
        Ok(ElasticParams { mu, lambda })
    }
}

/// Exponents of the nonlinear energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonlinearParams {
    pub p: f64,
    pub r: f64,
}

impl Default for NonlinearParams {
    fn default() -> Self {
        NonlinearParams { p: 2.0, r: 2.0 }
    }
}

/// Everything that defines a discrete energy on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub kind: ModelKind,
    pub kernel: KernelSpec,
    /// Required by the flux models.
    pub gkernel: Option<SurfaceKernelSpec>,
    /// `a(x)` in the local term, evaluated at cell centers.
    pub local_coeff: Coefficient,
    pub elastic: ElasticParams,
    pub source: FieldPreset,
    /// Exterior Dirichlet datum `g_d`.
    pub exterior: FieldPreset,
    pub nonlinear: NonlinearParams,
    pub constraints: Constraints,
}

impl Model {
    pub fn new(kind: ModelKind, kernel: KernelSpec) -> Self {
        Model {
            kind,
            kernel,
            gkernel: None,
            local_coeff: Coefficient::default(),
            elastic: ElasticParams::default(),
            source: FieldPreset::zero(),
            exterior: FieldPreset::zero(),
            nonlinear: NonlinearParams::default(),
            constraints: Constraints::default(),
        }
    }

    pub fn with_gkernel(mut self, g: SurfaceKernelSpec) -> Self {
        self.gkernel = Some(g);
        self
    }

    pub fn with_source(mut self, f: FieldPreset) -> Self {
        self.source = f;
        self
    }

    pub fn with_exterior(mut self, g: FieldPreset) -> Self {
        self.exterior = g;
        self
    }

    pub fn with_constraints(mut self, c: Constraints) -> Self {
        self.constraints = c;
        self
    }

    pub fn with_elastic(mut self, e: ElasticParams) -> Self {
        self.elastic = e;
        self
    }

    pub fn with_local_coeff(mut self, a: Coefficient) -> Self {
        self.local_coeff = a;
        self
    }

    pub fn with_nonlinear(mut self, p: f64, r: f64) -> Self {
        self.nonlinear = NonlinearParams { p, r };
        self
    }

    /// Unknowns per node.
    pub fn block(&self, dim: usize) -> usize {
        if self.kind.is_elastic() {
            dim
        } else {
            1
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        self.local_coeff.validate()?;
        if self.kind.is_flux() && self.gkernel.is_none() {
            return Err(Error::InvalidParameter(format!(
                "model {} needs a surface kernel",
                self.kind.name()
            )));
        }
        if self.kind.is_elastic() {
            ElasticParams::new(self.elastic.mu, self.elastic.lambda)?;
        }
        Ok(())
    }
}

/// A carrier of unknowns: a grid vertex (local side) or a cell (nonlocal side).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Vertex(usize),
    Cell(usize),
}

/// Active unknowns: vertices of the closure of Ω_ℓ (minus ∂Ω when Dirichlet
/// elimination is on) followed by NONLOCAL cells, each carrying `block`
/// components. Unknown `node·block + comp`.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    nodes: Vec<Node>,
    block: usize,
    num_vertex_nodes: usize,
    vertex_node: Vec<usize>,
    cell_node: Vec<usize>,
    closure: Vec<bool>,
    boundary: Vec<bool>,
    constraints: Constraints,
}

const NONE: usize = usize::MAX;

impl DofMap {
    pub fn build(grid: &GridDomain, block: usize, constraints: Constraints) -> DofMap {
        let nv = grid.num_vertices();
        let mut closure = vec![false; nv];
        for c in grid.cells_with(Label::Local) {
            for v in grid.cell_vertices(c) {
                closure[v] = true;
            }
        }
        let boundary: Vec<bool> = (0..nv)
            .map(|v| {
                grid.vertex_cells(v)
                    .iter()
                    .any(|c| c.is_none_or(|c| grid.label(c) == Label::Exterior))
            })
            .collect();
        let mut nodes = Vec::new();
        let mut vertex_node = vec![NONE; nv];
        for v in 0..nv {
            if closure[v] && !(constraints.dirichlet && boundary[v]) {
                vertex_node[v] = nodes.len();
                nodes.push(Node::Vertex(v));
            }
        }
        let num_vertex_nodes = nodes.len();
        let mut cell_node = vec![NONE; grid.num_cells()];
        for c in grid.cells_with(Label::Nonlocal) {
            cell_node[c] = nodes.len();
            nodes.push(Node::Cell(c));
        }
        DofMap {
            nodes,
            block,
            num_vertex_nodes,
            vertex_node,
            cell_node,
            closure,
            boundary,
            constraints,
        }
    }

    /// Total unknown count.
    pub fn len(&self) -> usize {
        self.nodes.len() * self.block
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn constraints(&self) -> Constraints {
        self.constraints
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_vertex_nodes(&self) -> usize {
        self.num_vertex_nodes
    }

    pub fn vertex_node(&self, v: usize) -> Option<usize> {
        let k = self.vertex_node[v];
        (k != NONE).then_some(k)
    }

    pub fn cell_node(&self, c: usize) -> Option<usize> {
        let k = self.cell_node[c];
        (k != NONE).then_some(k)
    }

    pub fn dof(&self, node: usize, comp: usize) -> usize {
        node * self.block + comp
    }

    /// Whether `v` is a vertex of some LOCAL cell.
    pub fn in_closure(&self, v: usize) -> bool {
        self.closure[v]
    }

    /// Whether `v` touches an EXTERIOR cell or the edge of the padded grid.
    pub fn on_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    /// Whether `v` is a LOCAL vertex held at the exterior datum.
    pub fn is_eliminated(&self, v: usize) -> bool {
        self.closure[v] && self.vertex_node[v] == NONE
    }

    pub fn node_coords(&self, grid: &GridDomain, node: usize) -> Point {
        match self.nodes[node] {
            Node::Vertex(v) => grid.vertex_coords(v),
            Node::Cell(c) => grid.cell_center(c),
        }
    }

    /// Lumped measure of a vertex: `h^N/2^N` per adjacent LOCAL cell.
    pub fn vertex_weight(grid: &GridDomain, v: usize) -> f64 {
        let share = grid.cell_volume() / (1usize << grid.dim()) as f64;
        grid.vertex_cells(v)
            .iter()
            .filter(|c| c.is_some_and(|c| grid.label(c) == Label::Local))
            .count() as f64
            * share
    }

    pub fn node_weight(&self, grid: &GridDomain, node: usize) -> f64 {
        match self.nodes[node] {
            Node::Vertex(v) => Self::vertex_weight(grid, v),
            Node::Cell(_) => grid.cell_volume(),
        }
    }

    /// Diagonal of the lumped mass matrix, repeated per component.
    pub fn lumped_mass(&self, grid: &GridDomain) -> Vec<f64> {
        let mut m = Vec::with_capacity(self.len());
        for k in 0..self.nodes.len() {
            let w = self.node_weight(grid, k);
            m.extend(std::iter::repeat_n(w, self.block));
        }
        m
    }
}

/// Values on the active unknowns of a [`DofMap`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field { values }
    }

    pub fn zeros(n: usize) -> Self {
        Field { values: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check(&self, dofmap: &DofMap) -> Result<()> {
        if self.values.len() != dofmap.len() {
            return Err(Error::DofMismatch {
                expected: dofmap.len(),
                got: self.values.len(),
            });
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_grid;

    #[test]
    fn pair_factors_follow_index_sets() {
        use Label::*;
        let s = NonlocalMode::Source;
        assert_eq!(s.pair_factor(Nonlocal, Nonlocal), 1.0);
        assert_eq!(s.pair_factor(Local, Nonlocal), 0.5);
        assert_eq!(s.pair_factor(Exterior, Nonlocal), 0.5);
        assert_eq!(s.pair_factor(Local, Exterior), 0.0);
        let f = NonlocalMode::SourceFull;
        assert_eq!(f.pair_factor(Nonlocal, Exterior), 1.0);
        assert_eq!(f.pair_factor(Exterior, Local), 0.5);
        assert_eq!(f.pair_factor(Exterior, Exterior), 0.0);
        let x = NonlocalMode::Flux;
        assert_eq!(x.pair_factor(Nonlocal, Local), 0.0);
        assert_eq!(x.pair_factor(Nonlocal, Exterior), 0.5);
        let i = NonlocalMode::Interior;
        assert_eq!(i.pair_factor(Nonlocal, Local), 0.5);
        assert_eq!(i.pair_factor(Nonlocal, Exterior), 0.0);
        for m in [s, f, x, i] {
            assert_eq!(m.pair_factor(Local, Local), 0.0);
        }
    }

    #[test]
    fn dofmap_eliminates_boundary_vertices() {
        let g = build_grid(1, &[(0.0, 1.0)], 0.5, |_| Label::Local, 1).unwrap();
        let d = DofMap::build(&g, 1, Constraints::default());
        assert_eq!(d.len(), 1);
        assert_eq!(
            g.vertex_coords(match d.nodes()[0] {
                Node::Vertex(v) => v,
                Node::Cell(_) => unreachable!(),
            })[0],
            0.5
        );
        let free = DofMap::build(&g, 1, Constraints::NONE);
        assert_eq!(free.len(), 3);
    }

    #[test]
    fn vertex_dofs_precede_cell_dofs() {
        let g = build_grid(
            2,
            &[(0.0, 1.0), (0.0, 1.0)],
            0.25,
            |x| if x[0] < 0.5 { Label::Local } else { Label::Nonlocal },
            1,
        )
        .unwrap();
        let d = DofMap::build(&g, 2, Constraints::default());
        // closure of the local half has 3x5 vertices; 2x3 interior or on Γ
        // survive except those on the outer boundary: x ∈ {0.25, 0.5}, y ∈ {0.25, 0.5, 0.75}
        assert_eq!(d.num_vertex_nodes(), 6);
        assert_eq!(d.num_nodes(), 6 + 8);
        assert_eq!(d.len(), 28);
        assert!(matches!(d.nodes()[5], Node::Vertex(_)));
        assert!(matches!(d.nodes()[6], Node::Cell(_)));
        let m = d.lumped_mass(&g);
        let total: f64 = m.iter().step_by(2).sum();
        // interior vertices carry full cell volume h²; Γ vertices carry h²/2
        assert!((total - (3.0 * 0.0625 + 3.0 * 0.03125 + 8.0 * 0.0625)).abs() < 1e-15);
    }

    #[test]
    fn field_checks_length_and_finiteness() {
        let g = build_grid(1, &[(0.0, 1.0)], 0.25, |_| Label::Nonlocal, 1).unwrap();
        let d = DofMap::build(&g, 1, Constraints::default());
        assert!(Field::zeros(4).check(&d).is_ok());
        assert!(matches!(Field::zeros(3).check(&d), Err(Error::DofMismatch { .. })));
        assert!(Field::new(vec![0.0, f64::NAN, 0.0, 0.0]).check(&d).is_err());
    }

    #[test]
    fn profiles() {
        let x = [0.25, 0.5];
        assert_eq!(
            Profile::Linear {
                slope: [2.0, 0.0],
                intercept: 1.0
            }
            .eval(&x, 1),
            1.5
        );
        let s = Profile::SeparableSine {
            amplitude: 2.0,
            freq: [2.0, 1.0],
        }
        .eval(&x, 2);
        assert!((s - 2.0).abs() < 1e-15);
        let v = FieldPreset::vector(Profile::Constant(3.0), [0.0, -1.0]);
        assert_eq!(v.value(&x, 2, 0), 0.0);
        assert_eq!(v.value(&x, 2, 1), -3.0);
        assert!(FieldPreset::zero().is_zero());
    }
}
