//! What a failed null check does depends on the enclosing function.
use acr::site::{functions, infer_error_strategy, StrategyConfig};
use acr::view::SourceView;

const SRC: &str = r#"
int parse(const char *s) {
  if (!s)
    return -1;
  return 0;
}
struct node *find(struct node *n) {
  if (!n)
    return NULL;
  return n->next;
}
void touch(int *p) { *p = 1; }
double mean(double *v) { return v[0]; }
"#;

fn main() {
    let view = SourceView::new(SRC.as_bytes()).unwrap();
    let custom = StrategyConfig { error_handler: Some("goto fail;".into()) };
    for f in functions(&view) {
        let inferred = infer_error_strategy(Some(&f), &StrategyConfig::default());
        let forced = infer_error_strategy(Some(&f), &custom);
        println!("{:<6} {:?}\t-> {}\t(custom: {})", f.name, f.return_class, inferred.render(), forced.render());
    }
}
