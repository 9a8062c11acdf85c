//! Terms of the logic: parsing against a context, normal forms, equality
//! up to α/β/η, and how de Bruijn indices move when the constant stack does.
//!
//!     cargo run -p peerhol --example terms

use peerhol::context::ContextSource;
use peerhol::engine::{Engine, EngineConfig, ExecRequest};
use peerhol::kernel::{alpha_beta_eta_equal, normalize, shift_constants, typecheck, LogicType};
use peerhol::store::{Store, StoreConfig};
use peerhol::syntax::{parse_term, print_term, Mode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let engine = Engine::open(Store::memory(StoreConfig::default()), EngineConfig::default())?;
    // names visible in the root theory: ∅, ∈, the axioms' constants, ...
    let env = engine.store().name_env(&engine.root())?;

    for src in ["(λ x : set. x ∈ x) ∅", "λ f : set → set. λ y. f y", "∀ x. ∃ y. x ∈ y ∧ ¬ (y = ∅)"] {
        let (t, ty) = parse_term(src, &env)?;
        let n = normalize(&t)?;
        println!("{src}");
        println!("    type        {ty}");
        println!("    normal form {}", print_term(&n, &env, Mode::Unicode));
        println!("    ascii       {}", print_term(&n, &env, Mode::Ascii));
    }

    let (a, _) = parse_term("λ x : set. λ y : set. x = y", &env)?;
    let (b, _) = parse_term("λ u : set. (λ v : set. u = v)", &env)?;
    let (c, _) = parse_term("λ u : set. (λ v : set. v = u)", &env)?;
    println!("\nα-equivalent: {}", alpha_beta_eta_equal(&a, &b, env.types())?);
    println!("swapped sides equal: {}", alpha_beta_eta_equal(&a, &c, env.types())?);

    // fixed constants live on the context stack and are addressed by
    // index; opening one more context in front shifts every free index
    let fixed = engine.execute(&ExecRequest::new("demo", "fix \"x : set\"\nfix \"y : set\""))?;
    let env = engine.store().name_env(&fixed.final_context)?;
    let (t, _) = parse_term("x ∈ y", &env)?;
    let shifted = shift_constants(&t, 1)?;
    println!("\nx ∈ y          {t:?}");
    println!("shifted by one {shifted:?}");
    let mut deeper = vec![LogicType::Prop];
    deeper.extend(env.types().iter().cloned());
    println!("well typed under one more constant: {}", typecheck(&shifted, &deeper)?);
    Ok(())
}
