use roxmltree::{Document, Node};

use super::IngestError;
use crate::model::{BoundingBox, GuiNode};

/// Class given to the node wrapping several top-level `node` elements.
pub const SYNTHETIC_ROOT_CLASS: &str = "ROOT";

/// Parses `bounds="[x1,y1][x2,y2]"`.
pub fn parse_bounds(raw: &str) -> Result<BoundingBox, IngestError> {
    let bad = || IngestError::MalformedBounds(raw.to_string());
    let inner = raw
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(bad)?;
    let (first, second) = inner.split_once("][").ok_or_else(bad)?;
    let pair = |s: &str| -> Result<(i64, i64), IngestError> {
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        Ok((
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ))
    };
    let (x1, y1) = pair(first)?;
    let (x2, y2) = pair(second)?;
    BoundingBox::new(x1, y1, x2, y2).map_err(|_| bad())
}

fn flag(node: &Node<'_, '_>, name: &str) -> bool {
    node.attribute(name)
        .is_some_and(|v| v.eq_ignore_ascii_case("true"))
}

fn convert(node: Node<'_, '_>) -> Result<GuiNode, IngestError> {
    let class_name = node.attribute("class").unwrap_or("").trim().to_string();
    if class_name.is_empty() {
        let pos = node.document().text_pos_at(node.range().start);
        return Err(IngestError::MalformedXml(format!(
            "node without class at {pos}"
        )));
    }
    let attr = |name: &str| node.attribute(name).unwrap_or("").to_string();
    let bounds = match node.attribute("bounds") {
        Some(raw) => parse_bounds(raw)?,
        None => BoundingBox::default(),
    };
    let children = node
        .children()
        .filter(|c| c.has_tag_name("node"))
        .map(convert)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GuiNode {
        class_name,
        text: attr("text"),
        content_desc: attr("content-desc"),
        resource_id: attr("resource-id"),
        package: attr("package"),
        bounds,
        clickable: flag(&node, "clickable"),
        enabled: node
            .attribute("enabled")
            .is_none_or(|v| v.eq_ignore_ascii_case("true")),
        focusable: flag(&node, "focusable"),
        scrollable: flag(&node, "scrollable"),
        checked: flag(&node, "checked"),
        selected: flag(&node, "selected"),
        children,
    })
}

/// Parses a UI-automation hierarchy dump into its root node.
pub fn parse_hierarchy(xml: &[u8]) -> Result<GuiNode, IngestError> {
    let text = std::str::from_utf8(xml).map_err(|e| IngestError::MalformedXml(e.to_string()))?;
    let doc = Document::parse(text).map_err(|e| IngestError::MalformedXml(e.to_string()))?;
    let root = doc.root_element();
    if root.has_tag_name("node") {
        return convert(root);
    }
    if !root.has_tag_name("hierarchy") {
        return Err(IngestError::MalformedXml(format!(
            "expected <hierarchy> root, found <{}>",
            root.tag_name().name()
        )));
    }
    let mut tops = root
        .children()
        .filter(|c| c.has_tag_name("node"))
        .map(convert)
        .collect::<Result<Vec<_>, _>>()?;
    match tops.len() {
        0 => Err(IngestError::MalformedXml(
            "hierarchy contains no nodes".into(),
        )),
        1 => Ok(tops.pop().unwrap()),
        _ => {
            let mut synthetic = GuiNode::new(SYNTHETIC_ROOT_CLASS);
            synthetic.children = tops;
            Ok(synthetic)
        }
    }
}

/// Pre-order walk skipping the synthetic wrapper node.
pub fn real_nodes(root: &GuiNode) -> impl Iterator<Item = &GuiNode> {
    root.iter()
        .enumerate()
        .filter(|(i, n)| !(*i == 0 && n.class_name == SYNTHETIC_ROOT_CLASS))
        .map(|(_, n)| n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node() {
        let xml = br#"<?xml version="1.0"?><hierarchy rotation="0"><node class="android.widget.Button" text="OK" bounds="[0,0][10,10]" clickable="true"/></hierarchy>"#;
        let n = parse_hierarchy(xml).unwrap();
        assert_eq!(n.class_name, "android.widget.Button");
        assert_eq!(n.text, "OK");
        assert_eq!(n.bounds, BoundingBox::new(0, 0, 10, 10).unwrap());
        assert!(n.clickable);
        assert!(n.enabled);
    }

    #[test]
    fn nested_pre_order() {
        let xml = br#"<hierarchy>
            <node class="android.widget.FrameLayout" package="com.x" bounds="[0,0][100,200]">
                <node class="android.widget.LinearLayout" bounds="[0,0][100,100]">
                    <node class="android.widget.EditText" text="Email" resource-id="com.x:id/email" content-desc="email field" bounds="[0,0][100,50]" enabled="false"/>
                </node>
            </node>
        </hierarchy>"#;
        let n = parse_hierarchy(xml).unwrap();
        let classes: Vec<_> = n.iter().map(|n| n.class_name.as_str()).collect();
        assert_eq!(
            classes,
            [
                "android.widget.FrameLayout",
                "android.widget.LinearLayout",
                "android.widget.EditText"
            ]
        );
        let leaf = &n.children[0].children[0];
        assert_eq!(leaf.resource_id, "com.x:id/email");
        assert_eq!(leaf.content_desc, "email field");
        assert!(!leaf.enabled);
        assert_eq!(n.package, "com.x");
    }

    #[test]
    fn multiple_tops_get_synthetic_root() {
        let xml = br#"<hierarchy><node class="a.A" bounds="[0,0][1,1]"/><node class="a.B" bounds="[0,0][1,1]"/></hierarchy>"#;
        let n = parse_hierarchy(xml).unwrap();
        assert_eq!(n.class_name, SYNTHETIC_ROOT_CLASS);
        assert_eq!(n.children.len(), 2);
        assert_eq!(real_nodes(&n).count(), 2);
    }

    #[test]
    fn errors() {
        let bad_bounds = br#"<hierarchy><node class="a.A" bounds="[5,5][3,3]"/></hierarchy>"#;
        assert!(matches!(
            parse_hierarchy(bad_bounds),
            Err(IngestError::MalformedBounds(_))
        ));
        let garbled = br#"<hierarchy><node class="a.A" bounds="0,0,3,3"/></hierarchy>"#;
        assert!(matches!(
            parse_hierarchy(garbled),
            Err(IngestError::MalformedBounds(_))
        ));
        assert!(matches!(
            parse_hierarchy(b"<hierarchy><node"),
            Err(IngestError::MalformedXml(_))
        ));
        assert!(matches!(
            parse_hierarchy(b"<hierarchy/>"),
            Err(IngestError::MalformedXml(_))
        ));
        assert!(matches!(
            parse_hierarchy(br#"<hierarchy><node text="x"/></hierarchy>"#),
            Err(IngestError::MalformedXml(_))
        ));
    }

    #[test]
    fn bounds_parsing() {
        assert_eq!(
            parse_bounds("[1,2][3,4]").unwrap(),
            BoundingBox::new(1, 2, 3, 4).unwrap()
        );
        assert!(parse_bounds("[1,2][3]").is_err());
        assert!(parse_bounds("[-1,2][3,4]").is_err());
    }
}
