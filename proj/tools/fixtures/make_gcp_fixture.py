#!/usr/bin/env python3
"""Writes the cloud-CLI fixture corpus under data/gcp/.

Produces one HTML page per source command (raw/<tool id>.html), the rename
map, the five reference tasks (reference_tasks.json) and a 50-task fixture
benchmark source (fixture_tasks.json) that embeds those five.

The pages imitate scraped CLI reference pages: navigation links, NAME /
SYNOPSIS / DESCRIPTION / EXAMPLES sections and a footer. Descriptions are
short original summaries, not copies of any vendor page.
"""
import html
import json
import pathlib
import random

ROOT = pathlib.Path(__file__).resolve().parents[2] / "data" / "gcp"

# (source command, synopsis arguments, one-line summary, description, example)
TOOLS = [
    ("gcloud config set", "SECTION/PROPERTY VALUE",
     "set a property in the active configuration",
     "Sets the specified property in your active configuration only. A property governs the behavior of a specific aspect of the command line tool, such as the default project or the default compute zone.",
     "gcloud config set project my-project"),
    ("gcloud run deploy", "SERVICE --image=IMAGE",
     "create or update a serverless container service",
     "Deploys a container image to a fully managed serverless run service. If the service does not exist it is created; otherwise a new revision is rolled out with the given container image.",
     "gcloud run deploy my-service --image=us-docker.pkg.dev/project/repo/image"),
    ("gcloud scheduler jobs create http", "NAME --schedule=SCHEDULE --uri=URI",
     "create a scheduler job with an HTTP target",
     "Creates a cron scheduler job that invokes an HTTP endpoint on a schedule. The schedule uses unix-cron format, for example every 2 hours.",
     "gcloud scheduler jobs create http my-job --schedule=\"0 */2 * * *\" --uri=https://example.com/run"),
    ("gsutil cp", "SRC_URL DST_URL",
     "copy files and objects to and from storage buckets",
     "Copies data between your local file system and cloud storage buckets, or between buckets. Use it to upload a local file such as a model or an audio file to a bucket location.",
     "gsutil cp model.pt gs://my-bucket/model.pt"),
    ("gcloud ai-platform versions create", "VERSION --model=MODEL --origin=ORIGIN",
     "create a new machine learning model version",
     "Creates a new version of an existing machine learning model on the AI platform from a saved model artifact stored in a bucket. Use it to deploy a trained model for online prediction.",
     "gcloud ai-platform versions create v1 --model=my_model --origin=gs://my-bucket/model/"),
    ("gcloud ml speech recognize-long-running", "AUDIO --language-code=LANGUAGE_CODE",
     "get transcripts of long audio from a storage location",
     "Runs asynchronous speech recognition to get a transcript of an audio file longer than 60 seconds. The audio must be stored in a bucket; the operation returns the recognized text of the speech.",
     "gcloud ml speech recognize-long-running gs://my-bucket/audio.wav --language-code=en-US"),
    ("gcloud composer environments create", "ENVIRONMENT --location=LOCATION",
     "create and initialize a workflow composer environment",
     "Creates a new managed workflow orchestration composer environment. Environments can be configured with a private IP network so that workers are not exposed to the internet.",
     "gcloud composer environments create my-env --location=us-central1"),
    ("gcloud compute networks subnets update", "NAME --enable-private-ip-google-access",
     "update a subnetwork of a virtual network",
     "Updates properties of a subnet, for example enabling private IP google access so that instances without external addresses can reach cloud services over a private ip network.",
     "gcloud compute networks subnets update default --enable-private-ip-google-access"),
    ("gcloud iam service-accounts create", "NAME --display-name=DISPLAY_NAME",
     "create an identity and access service account",
     "Creates a service account for a project. A service account is an identity used by applications and virtual machines; give it a display name to describe its purpose.",
     "gcloud iam service-accounts create my-sa --display-name=\"My service account\""),
    ("gcloud projects add-iam-policy-binding", "PROJECT_ID --member=PRINCIPAL --role=ROLE",
     "add an identity and access policy binding to a project",
     "Adds a policy binding to the access policy of a project, granting a role such as a data editor or a service agent permissions to a member like a service account or a user.",
     "gcloud projects add-iam-policy-binding my-project --member=user:test@example.com --role=roles/editor"),
    ("gcloud pubsub topics create", "TOPIC",
     "create one or more messaging topics",
     "Creates one or more publish/subscribe messaging topics. Publishers send messages to topics and subscribers receive them through subscriptions.",
     "gcloud pubsub topics create my-topic"),
    ("gcloud pubsub subscriptions create", "SUBSCRIPTION --topic=TOPIC",
     "create one or more messaging subscriptions",
     "Creates one or more publish/subscribe subscriptions attached to a topic so that subscribers can pull or receive pushed messages.",
     "gcloud pubsub subscriptions create my-sub --topic=my-topic"),
    ("gcloud compute instances create", "INSTANCE --zone=ZONE",
     "create virtual machine instances",
     "Creates virtual machine compute instances in a zone. Machine type, image and disks can be chosen; the instance starts running once created.",
     "gcloud compute instances create my-vm --zone=us-central1-a"),
    ("gcloud compute instances stop", "INSTANCE --zone=ZONE",
     "stop a virtual machine instance",
     "Stops a running virtual machine compute instance in a zone. A stopped instance keeps its disks but is not billed for its machine resources.",
     "gcloud compute instances stop my-vm --zone=us-central1-a"),
    ("gcloud compute firewall-rules create", "NAME --allow=RULES",
     "create a network firewall rule",
     "Creates a firewall rule that allows incoming traffic to virtual machine instances on a network, for example allowing tcp port 80 for a web server.",
     "gcloud compute firewall-rules create allow-http --allow=tcp:80"),
    ("gcloud compute disks create", "DISK --size=SIZE",
     "create persistent disks",
     "Creates persistent block storage disks of a given size that can be attached to virtual machine instances.",
     "gcloud compute disks create my-disk --size=100GB"),
    ("gsutil mb", "gs://BUCKET",
     "make a storage bucket",
     "Makes a new cloud storage bucket that holds objects and files. Bucket names are global.",
     "gsutil mb gs://my-bucket"),
    ("gcloud sql instances create", "INSTANCE --tier=TIER",
     "create a relational database instance",
     "Creates a managed relational database server instance, for example a mysql or postgres instance with a machine tier.",
     "gcloud sql instances create my-db --tier=db-n1-standard-1"),
    ("gcloud sql databases create", "DATABASE --instance=INSTANCE",
     "create a database inside a database instance",
     "Creates a database within an existing managed relational database server instance.",
     "gcloud sql databases create orders --instance=my-db"),
    ("gcloud container clusters create", "CLUSTER --num-nodes=NUM_NODES",
     "create a kubernetes container cluster",
     "Creates a kubernetes container cluster for running containerized workloads with a given number of nodes.",
     "gcloud container clusters create my-cluster --num-nodes=3"),
    ("gcloud container clusters get-credentials", "CLUSTER",
     "fetch kubernetes credentials for a running cluster",
     "Fetches credentials for a running kubernetes container cluster and updates the local kubeconfig so kubectl can talk to the cluster.",
     "gcloud container clusters get-credentials my-cluster"),
    ("gcloud functions deploy", "NAME --runtime=RUNTIME --trigger-http",
     "create or update a serverless function",
     "Deploys serverless functions triggered by http requests, written in a supported runtime such as python or nodejs.",
     "gcloud functions deploy hello --runtime=python311 --trigger-http"),
    ("gcloud services enable", "SERVICE",
     "enable a service api for consumption for a project",
     "Enables a service api such as the compute api or the speech api so that it can be used by a project.",
     "gcloud services enable speech.googleapis.com"),
    ("gcloud builds submit", "--tag=IMAGE",
     "submit a container image build",
     "Submits a build that packages source code into a container image and pushes the image with the given tag to a registry.",
     "gcloud builds submit --tag=us-docker.pkg.dev/project/repo/app"),
    ("gcloud app deploy", "DEPLOYABLES",
     "deploy the local code and configuration of an app",
     "Deploys the local code and configuration of a web app to the managed app engine platform, using the app yaml file.",
     "gcloud app deploy app.yaml"),
    ("gcloud dataproc clusters create", "CLUSTER --region=REGION",
     "create a managed spark and hadoop cluster",
     "Creates a managed dataproc cluster for running spark and hadoop data processing jobs in a region.",
     "gcloud dataproc clusters create analytics --region=us-central1"),
    ("gcloud dataproc jobs submit pyspark", "PY_FILE --cluster=CLUSTER",
     "submit a pyspark job to a cluster",
     "Submits a pyspark data processing job written in python to a managed dataproc cluster.",
     "gcloud dataproc jobs submit pyspark job.py --cluster=analytics"),
    ("gcloud kms keyrings create", "KEYRING --location=LOCATION",
     "create a key ring for encryption keys",
     "Creates a key ring that groups cryptographic encryption keys in a location for the key management service.",
     "gcloud kms keyrings create my-ring --location=global"),
    ("gcloud kms keys create", "KEY --keyring=KEYRING --purpose=encryption",
     "create a cryptographic encryption key",
     "Creates a cryptographic key inside a key ring, with purpose encryption for symmetric encrypt and decrypt.",
     "gcloud kms keys create my-key --keyring=my-ring --purpose=encryption"),
    ("gcloud redis instances create", "INSTANCE --region=REGION",
     "create a managed in-memory redis cache instance",
     "Creates a managed in-memory redis cache instance in a region for low latency caching.",
     "gcloud redis instances create cache --region=us-central1"),
]

# Phrase-level renames: "create" becomes "make" only inside these commands.
MAKE_RENAMED = [
    "scheduler jobs create", "composer environments create", "pubsub topics create",
    "pubsub subscriptions create", "compute instances create", "compute firewall-rules create",
    "compute disks create", "sql instances create", "sql databases create",
    "container clusters create", "dataproc clusters create", "kms keyrings create",
    "kms keys create", "redis instances create",
]

RENAME_MAP = [["gcloud", "llmcloud"], ["gsutil", "llmutil"]] + [
    [phrase, phrase.rsplit(" ", 1)[0] + " make"] for phrase in MAKE_RENAMED
]

NAV = """<nav class="devsite-nav"><a href="https://cloud.google.com/">Cloud</a> <a href="https://cloud.google.com/docs">Documentation</a> <a href="https://cloud.google.com/sdk/docs">SDK guides</a> <a href="https://cloud.google.com/sdk/gcloud/reference">Reference</a></nav>"""
FOOTER = """<footer><p>Except as otherwise noted, the content of this page is licensed under the <a href="https://creativecommons.org/licenses/by/4.0/">Creative Commons Attribution 4.0 License</a>. <a href="https://policies.google.com/terms">Terms</a> | <a href="https://policies.google.com/privacy">Privacy</a></p></footer>"""


def page(command, args, summary, description, example):
    e = html.escape
    return f"""<!DOCTYPE html>
<html lang="en">
<head><title>{e(command)} | Cloud SDK reference</title>
<style>.devsite-nav {{ display: flex; }}</style>
<script>window.dataLayer = window.dataLayer || [];</script>
</head>
<body>
{NAV}
<article>
<h1>{e(command)}</h1>
<h2>NAME</h2>
<dl><dt>{e(command)}</dt><dd>{e(summary)}</dd></dl>
<h2>SYNOPSIS</h2>
<pre>{e(command)} {e(args)}</pre>
<h2>DESCRIPTION</h2>
<p>{e(description)}</p>
<p>See also <a href="https://cloud.google.com/sdk/docs/properties">configuration properties</a> and <a href="https://cloud.google.com/iam/docs">access control</a>.</p>
<h2>EXAMPLES</h2>
<p>To run the command:</p>
<pre>{e(example)}</pre>
<h2>NOTES</h2>
<p>This command is in the <b>general availability</b> release track.</p>
</article>
{FOOTER}
</body>
</html>
"""


REFERENCE = [
    {
        "task_id": "ref-01",
        "question": "Show me how to deploy ocr-xer container and invoke it with a schedule every 2 hours on a project \"test_proj\" in sdk command lines. The ocr-xer container is located at \"us-docker.pkg.dev/gcr-cleaner/ocr-xer/ocr-xer\".",
        "gold_plan": [
            "gcloud config set project test_proj",
            "gcloud run deploy ocr-xer --image=us-docker.pkg.dev/gcr-cleaner/ocr-xer/ocr-xer",
            "gcloud scheduler jobs create http NAME --schedule --schedule=\"0 */2 * * *\"",
        ],
    },
    {
        "task_id": "ref-02",
        "question": "How to deploy a machine learning model model.pt saved in my local to cloud via sdk command line?",
        "gold_plan": [
            "gsutil cp model.pt LOC/model.pt",
            "gcloud ai-platform versions create VERSION --model MODEL --origin gs://LOC/model.pt",
        ],
    },
    {
        "task_id": "ref-03",
        "question": "How to get transcript of a video test.mp4 at local via the cloud SDK?",
        "gold_plan": [
            "ffmpeg -i test.mp4 -ac 2 -f wav output.wav",
            "gsutil cp test.wav LOC/test.wav",
            "gcloud ml speech recognize-long-running --uri LOC/test.wav",
        ],
    },
    {
        "task_id": "ref-04",
        "question": "How to create a composer enviroment with a private ip network?",
        "gold_plan": [
            "gcloud composer environments create my_env",
            "gcloud compute networks subnets update default \\\n--enable-private-ip-google-access",
        ],
    },
    {
        "task_id": "ref-05",
        "question": "How to create a service account test@service.com with the name \"AutoML\" \"BigQuery Data Editor\" and \"\"AutoML Recommendations Service Account\" permissions?",
        "gold_plan": [
            "gcloud iam service-accounts test@service.com --display-name AutoML",
            "gcloud projects add-iam-policy-binding PROJ_ID --member=\"test@service.com\" --role \"roles/bigquery.dataEditor\"",
            "gcloud projects add-iam-policy-binding PROJ_ID --member \"test@service.com\" --role \"roles/automlrecommendations.serviceAgent\"",
        ],
    },
]

# Expected renamed column after forging (continuations joined), written by
# hand so the forge output can be checked against it.
REFERENCE_RENAMED = {
    "ref-01": [
        "llmcloud config set project test_proj",
        "llmcloud run deploy ocr-xer --image=us-docker.pkg.dev/gcr-cleaner/ocr-xer/ocr-xer",
        "llmcloud scheduler jobs make http NAME --schedule --schedule=\"0 */2 * * *\"",
    ],
    "ref-02": [
        "llmutil cp model.pt LOC/model.pt",
        "llmcloud ai-platform versions create VERSION --model MODEL --origin gs://LOC/model.pt",
    ],
    "ref-03": [
        "ffmpeg -i test.mp4 -ac 2 -f wav output.wav",
        "llmutil cp test.wav LOC/test.wav",
        "llmcloud ml speech recognize-long-running --uri LOC/test.wav",
    ],
    "ref-04": [
        "llmcloud composer environments make my_env",
        "llmcloud compute networks subnets update default --enable-private-ip-google-access",
    ],
    "ref-05": [
        "llmcloud iam service-accounts test@service.com --display-name AutoML",
        "llmcloud projects add-iam-policy-binding PROJ_ID --member=\"test@service.com\" --role \"roles/bigquery.dataEditor\"",
        "llmcloud projects add-iam-policy-binding PROJ_ID --member \"test@service.com\" --role \"roles/automlrecommendations.serviceAgent\"",
    ],
}

# Multi-step workflows over synopsis-form commands: (question, [tool commands]).
WORKFLOWS = [
    ("Create a pubsub messaging topic and a subscription attached to the topic.",
     ["gcloud pubsub topics create", "gcloud pubsub subscriptions create"]),
    ("Make a storage bucket and copy a local file into the bucket.",
     ["gsutil mb", "gsutil cp"]),
    ("Create a virtual machine instance in a zone and a firewall rule allowing http traffic to it.",
     ["gcloud compute instances create", "gcloud compute firewall-rules create"]),
    ("Create a persistent disk and a virtual machine instance that will use it.",
     ["gcloud compute disks create", "gcloud compute instances create"]),
    ("Create a managed relational database instance and a database inside that instance.",
     ["gcloud sql instances create", "gcloud sql databases create"]),
    ("Create a kubernetes container cluster and fetch credentials so kubectl can use the cluster.",
     ["gcloud container clusters create", "gcloud container clusters get-credentials"]),
    ("Build a container image from source with a tag and deploy it as a serverless run service.",
     ["gcloud builds submit", "gcloud run deploy"]),
    ("Enable the functions service api and deploy a serverless function triggered by http.",
     ["gcloud services enable", "gcloud functions deploy"]),
    ("Create a managed dataproc spark cluster in a region and submit a pyspark job to the cluster.",
     ["gcloud dataproc clusters create", "gcloud dataproc jobs submit pyspark"]),
    ("Create a key ring for the key management service and an encryption key inside the key ring.",
     ["gcloud kms keyrings create", "gcloud kms keys create"]),
    ("Set the default project property in the configuration and create a redis cache instance in a region.",
     ["gcloud config set", "gcloud redis instances create"]),
    ("Create a service account with a display name and grant it a role on the project with a policy binding.",
     ["gcloud iam service-accounts create", "gcloud projects add-iam-policy-binding"]),
    ("Upload an audio file to a bucket and get a transcript of the long audio with speech recognition.",
     ["gsutil cp", "gcloud ml speech recognize-long-running"]),
    ("Copy a saved model to a bucket and create a machine learning model version from it.",
     ["gsutil cp", "gcloud ai-platform versions create"]),
    ("Create a composer environment and update the subnet to enable private ip google access.",
     ["gcloud composer environments create", "gcloud compute networks subnets update"]),
    ("Deploy a serverless run service and create a scheduler job with an http target that invokes it on a schedule.",
     ["gcloud run deploy", "gcloud scheduler jobs create http"]),
    ("Stop a virtual machine instance in a zone and create a persistent disk of a given size.",
     ["gcloud compute instances stop", "gcloud compute disks create"]),
    ("Enable the speech service api, upload audio to a bucket and get a transcript of the audio.",
     ["gcloud services enable", "gsutil cp", "gcloud ml speech recognize-long-running"]),
    ("Make a storage bucket, create a pubsub topic and a subscription for the topic.",
     ["gsutil mb", "gcloud pubsub topics create", "gcloud pubsub subscriptions create"]),
    ("Deploy the local code of a web app to the app engine platform and create a scheduler job with an http target.",
     ["gcloud app deploy", "gcloud scheduler jobs create http"]),
]


def synopsis(cmd):
    for command, args, *_ in TOOLS:
        if command == cmd:
            return f"{command} {args}"
    raise KeyError(cmd)


def main():
    raw = ROOT / "raw"
    raw.mkdir(parents=True, exist_ok=True)
    for old in raw.iterdir():
        old.unlink()
    for command, args, summary, description, example in TOOLS:
        (raw / f"{command}.html").write_text(page(command, args, summary, description, example), encoding="utf-8")

    (ROOT / "rename_map.json").write_text(json.dumps(RENAME_MAP, indent=2) + "\n", encoding="utf-8")

    rng = random.Random(20230801)
    demos = []
    for command, _, summary, _, example in TOOLS:
        demos.append({"instruction": f"How do I {summary}?", "plan": example})
    rng.shuffle(demos)
    demos = demos[:20]

    table4 = {"tasks": REFERENCE, "demo_pool": demos}
    (ROOT / "reference_tasks.json").write_text(json.dumps(table4, indent=2) + "\n", encoding="utf-8")
    (ROOT / "reference_expected.json").write_text(json.dumps(REFERENCE_RENAMED, indent=2) + "\n", encoding="utf-8")

    tasks = list(REFERENCE)
    n = 0
    while len(tasks) < 50:
        question, cmds = WORKFLOWS[n % len(WORKFLOWS)]
        variant = n // len(WORKFLOWS)
        prefix = ["", "Using the command line, ", "With sdk command lines: "][variant]
        q = prefix + (question[0].lower() + question[1:] if prefix else question)
        tasks.append({
            "task_id": f"wf-{n + 1:02d}",
            "question": q,
            "gold_plan": [synopsis(c) for c in cmds],
        })
        n += 1
    fixture = {"tasks": tasks, "demo_pool": demos}
    (ROOT / "fixture_tasks.json").write_text(json.dumps(fixture, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
